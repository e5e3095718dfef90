//! Graph contrastive learning with distilled topology-isomorphism expertise.
//!
//! Two expert systems score graphs without learning: a Weisfeiler-Lehman
//! label-set similarity between whole graphs ([`expert::iso_similarity`]) and
//! per-edge structural coefficients inside a graph ([`expert::structural_matrix`]).
//! Training ([`pipeline::train`]) pairs a GIN encoder with an NT-Xent
//! contrastive loss and two regression heads that learn to reproduce those
//! scores. Embeddings are evaluated by a cross-validated linear probe.

pub mod augment;
pub mod autodiff;
pub mod cli;
pub mod expert;
pub mod gnn;
pub mod graph;
pub mod objective;
pub mod pipeline;
pub mod tudataset;
