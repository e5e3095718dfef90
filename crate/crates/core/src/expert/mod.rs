//! Deterministic expert systems that produce the distillation targets.
//!
//! [`wl`] gives the graph-tier similarity between two views via 1-WL label
//! sets and the Jaccard coefficient. [`structural`] gives the subgraph-tier
//! target: row-normalized structural coefficients of overlap subgraphs.

pub mod structural;
pub mod wl;

use thiserror::Error;

pub use structural::{
    neighborhood_subgraph, overlap_subgraph, structural_coefficient, structural_matrix, LocalSubgraph,
    OverlapSize, StructuralCoefficients,
};
pub use wl::{
    iso_similarity, wl_refine, wl_refine_once, InitialLabels, IsoSimilarity, LabelSetPolicy, WlConfig,
    WlLabelTable, WlResult,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpertError {
    #[error("node index {index} out of range for graph with {num_nodes} nodes")]
    NodeIndex { index: usize, num_nodes: usize },
    #[error("nodes {v} and {u} are not adjacent")]
    NotAdjacent { v: usize, u: usize },
    #[error("overlap subgraph needs at least 2 nodes and 1 edge, got {node_count} nodes and {edge_count} edges")]
    DegenerateOverlap { node_count: usize, edge_count: usize },
    #[error("lambda must be positive and finite, got {0}")]
    Lambda(f64),
    #[error("WL needs at least one iteration")]
    NoIterations,
    #[error("graph {0} has no nodes")]
    EmptyGraph(usize),
    #[error("label sequence for graph {graph} has length {found}, expected {expected}")]
    LabelLength { graph: usize, expected: usize, found: usize },
}
