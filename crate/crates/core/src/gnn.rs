//! GIN encoder, projection head and the two expertise prediction heads.
//!
//! Graphs are encoded in batches: node rows of all graphs are stacked into one
//! matrix, message passing runs over the block-diagonal adjacency, and
//! pooling sums each graph's block of rows.

use std::collections::BTreeMap;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{Checkpoint, ParamId, ParamStore, Tape, Tensor, TensorError, Var};
use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GnnError {
    #[error("feature dimension {found} does not match encoder input dimension {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("graph {0} has no nodes")]
    EmptyGraph(usize),
    #[error("graph {0} has no node features")]
    MissingFeatures(usize),
    #[error("empty batch")]
    EmptyBatch,
    #[error("checkpoint header: {0}")]
    Header(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    #[default]
    Sum,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub layers: usize,
    pub hidden: usize,
    pub embedding: usize,
    /// Width of the per-node map applied before the Gram matrix.
    pub subiso_width: usize,
    /// Hidden width of the scalar map applied to each Gram entry.
    pub subiso_outer_width: usize,
    pub pooling: Pooling,
}

impl ModelConfig {
    pub fn new(input_dim: usize) -> Self {
        Self { input_dim, layers: 3, hidden: 32, embedding: 32, subiso_width: 16, subiso_outer_width: 8, pooling: Pooling::Sum }
    }

    /// Width of the first-layer node representation.
    pub fn first_layer_dim(&self) -> usize {
        if self.layers == 1 {
            self.embedding
        } else {
            self.hidden
        }
    }

    fn to_meta(self) -> BTreeMap<String, String> {
        let pooling = match self.pooling {
            Pooling::Sum => "sum",
            Pooling::Mean => "mean",
        };
        [
            ("input_dim", self.input_dim.to_string()),
            ("layers", self.layers.to_string()),
            ("hidden", self.hidden.to_string()),
            ("embedding", self.embedding.to_string()),
            ("subiso_width", self.subiso_width.to_string()),
            ("subiso_outer_width", self.subiso_outer_width.to_string()),
            ("pooling", pooling.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    fn from_meta(meta: &BTreeMap<String, String>) -> Result<Self, GnnError> {
        let num = |key: &str| -> Result<usize, GnnError> {
            meta.get(key)
                .ok_or_else(|| GnnError::Header(format!("missing {key}")))?
                .parse()
                .map_err(|_| GnnError::Header(format!("bad {key}")))
        };
        let pooling = match meta.get("pooling").map(String::as_str) {
            Some("sum") => Pooling::Sum,
            Some("mean") => Pooling::Mean,
            other => return Err(GnnError::Header(format!("bad pooling {other:?}"))),
        };
        Ok(Self {
            input_dim: num("input_dim")?,
            layers: num("layers")?,
            hidden: num("hidden")?,
            embedding: num("embedding")?,
            subiso_width: num("subiso_width")?,
            subiso_outer_width: num("subiso_outer_width")?,
            pooling,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: ParamId,
}

impl Linear {
    fn init<R: Rng + ?Sized>(store: &mut ParamStore, name: &str, fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let data = (0..fan_in * fan_out).map(|_| rng.gen_range(-bound..=bound)).collect();
        let weight = store.add(format!("{name}.weight"), Tensor::new(fan_in, fan_out, data).expect("weight shape"));
        let bias = store.add(format!("{name}.bias"), Tensor::zeros(1, fan_out));
        Self { weight, bias }
    }

    pub fn forward(&self, tape: &mut Tape, store: &ParamStore, x: Var) -> Result<Var, TensorError> {
        let w = tape.param(store, self.weight);
        let b = tape.param(store, self.bias);
        let xw = tape.matmul(x, w)?;
        tape.add_row(xw, b)
    }
}

/// Two linear maps with a ReLU between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mlp {
    pub first: Linear,
    pub second: Linear,
}

impl Mlp {
    fn init<R: Rng + ?Sized>(store: &mut ParamStore, name: &str, dims: [usize; 3], rng: &mut R) -> Self {
        Self {
            first: Linear::init(store, &format!("{name}.0"), dims[0], dims[1], rng),
            second: Linear::init(store, &format!("{name}.1"), dims[1], dims[2], rng),
        }
    }

    pub fn forward(&self, tape: &mut Tape, store: &ParamStore, x: Var) -> Result<Var, TensorError> {
        let h = self.first.forward(tape, store, x)?;
        let h = tape.relu(h);
        self.second.forward(tape, store, h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GinLayer {
    pub mlp: Mlp,
    pub eps: ParamId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub layers: Vec<GinLayer>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadParams {
    pub projection: Mlp,
    pub iso: Mlp,
    pub subiso_inner: Mlp,
    pub subiso_outer: Mlp,
}

/// Encoder plus heads, with all weights in one [`ParamStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub store: ParamStore,
    pub encoder: EncoderParams,
    pub heads: HeadParams,
}

/// Node rows of several graphs stacked into one block-diagonal problem.
#[derive(Debug, Clone)]
pub struct GraphBatch {
    pub features: Tensor,
    pub adjacency: Rc<Vec<Vec<usize>>>,
    pub offsets: Rc<Vec<usize>>,
}

impl GraphBatch {
    pub fn new(graphs: &[&Graph]) -> Result<Self, GnnError> {
        if graphs.is_empty() {
            return Err(GnnError::EmptyBatch);
        }
        let dim = graphs[0].feature_dim().ok_or(GnnError::MissingFeatures(0))?;
        let mut offsets = vec![0];
        let mut adjacency = Vec::new();
        let mut data = Vec::new();
        for (i, g) in graphs.iter().enumerate() {
            if g.num_nodes() == 0 {
                return Err(GnnError::EmptyGraph(i));
            }
            let rows = g.node_features().ok_or(GnnError::MissingFeatures(i))?;
            let base = *offsets.last().unwrap();
            for (v, row) in rows.iter().enumerate() {
                if row.len() != dim {
                    return Err(GnnError::Dimension { expected: dim, found: row.len() });
                }
                data.extend_from_slice(row);
                adjacency.push(g.neighbors(v).iter().map(|&u| u + base).collect());
            }
            offsets.push(base + g.num_nodes());
        }
        let total = *offsets.last().unwrap();
        Ok(Self {
            features: Tensor::new(total, dim, data)?,
            adjacency: Rc::new(adjacency),
            offsets: Rc::new(offsets),
        })
    }

    pub fn num_graphs(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn node_range(&self, g: usize) -> (usize, usize) {
        (self.offsets[g], self.offsets[g + 1])
    }
}

/// Tape handles produced by [`Model::encode_batch`].
#[derive(Debug, Clone, Copy)]
pub struct Encoded {
    /// One pooled embedding row per graph.
    pub z: Var,
    /// First-layer node representations for every node of the batch.
    pub h: Var,
}

impl Model {
    pub fn new<R: Rng + ?Sized>(config: ModelConfig, rng: &mut R) -> Self {
        assert!(config.layers >= 1, "encoder needs at least one layer");
        let mut store = ParamStore::new();
        let mut layers = Vec::with_capacity(config.layers);
        for l in 0..config.layers {
            let input = if l == 0 { config.input_dim } else { config.hidden };
            let output = if l + 1 == config.layers { config.embedding } else { config.hidden };
            let mlp = Mlp::init(&mut store, &format!("gin{l}.mlp"), [input, config.hidden, output], rng);
            let eps = store.add(format!("gin{l}.eps"), Tensor::scalar(0.0));
            layers.push(GinLayer { mlp, eps });
        }
        let d = config.embedding;
        let projection = Mlp::init(&mut store, "proj", [d, d, d], rng);
        let iso = Mlp::init(&mut store, "iso", [2 * d, d, 1], rng);
        let w = config.subiso_width;
        let subiso_inner = Mlp::init(&mut store, "subiso.inner", [config.first_layer_dim(), w, w], rng);
        let subiso_outer = Mlp::init(&mut store, "subiso.outer", [1, config.subiso_outer_width, 1], rng);
        Self {
            config,
            store,
            encoder: EncoderParams { layers },
            heads: HeadParams { projection, iso, subiso_inner, subiso_outer },
        }
    }

    fn check_input(&self, batch: &GraphBatch) -> Result<(), GnnError> {
        let found = batch.features.cols();
        if found != self.config.input_dim {
            return Err(GnnError::Dimension { expected: self.config.input_dim, found });
        }
        Ok(())
    }

    /// GIN message passing over the whole batch followed by pooling.
    pub fn encode_batch(&self, tape: &mut Tape, batch: &GraphBatch) -> Result<Encoded, GnnError> {
        self.check_input(batch)?;
        let mut h = tape.constant(batch.features.clone());
        let mut first = None;
        for layer in &self.encoder.layers {
            let eps = tape.param(&self.store, layer.eps);
            let one = tape.constant(Tensor::scalar(1.0));
            let self_weight = tape.add(one, eps)?;
            let own = tape.scale(h, self_weight)?;
            let neigh = tape.neighbor_sum(h, batch.adjacency.clone())?;
            let agg = tape.add(own, neigh)?;
            let out = layer.mlp.forward(tape, &self.store, agg)?;
            h = tape.relu(out);
            first.get_or_insert(h);
        }
        let z = tape.segment_sum(h, batch.offsets.clone(), self.config.pooling == Pooling::Mean)?;
        Ok(Encoded { z, h: first.expect("at least one layer") })
    }

    /// Embedding `Z` and first-layer node matrix `H` of a single graph.
    pub fn encode(&self, g: &Graph) -> Result<(Tensor, Tensor), GnnError> {
        let batch = GraphBatch::new(&[g])?;
        let mut tape = Tape::new();
        let enc = self.encode_batch(&mut tape, &batch)?;
        Ok((tape.value(enc.z).clone(), tape.value(enc.h).clone()))
    }

    fn check_cols(&self, tape: &Tape, v: Var, expected: usize) -> Result<(), GnnError> {
        let found = tape.value(v).cols();
        if found != expected {
            return Err(GnnError::Dimension { expected, found });
        }
        Ok(())
    }

    pub fn project(&self, tape: &mut Tape, z: Var) -> Result<Var, GnnError> {
        self.check_cols(tape, z, self.config.embedding)?;
        Ok(self.heads.projection.forward(tape, &self.store, z)?)
    }

    /// `sigmoid(MLP([z_i ; z_j]))`, one output row per row of the inputs.
    pub fn predict_iso(&self, tape: &mut Tape, zi: Var, zj: Var) -> Result<Var, GnnError> {
        self.check_cols(tape, zi, self.config.embedding)?;
        self.check_cols(tape, zj, self.config.embedding)?;
        let cat = tape.concat_cols(zi, zj)?;
        let logits = self.heads.iso.forward(tape, &self.store, cat)?;
        Ok(tape.sigmoid(logits))
    }

    /// `n x n` prediction of the normalized structural matrix from a graph's
    /// first-layer node matrix.
    pub fn predict_subiso(&self, tape: &mut Tape, h: Var) -> Result<Var, GnnError> {
        self.check_cols(tape, h, self.config.first_layer_dim())?;
        let n = tape.value(h).rows();
        let x = self.heads.subiso_inner.forward(tape, &self.store, h)?;
        let gram = autocor(tape, x)?;
        let entries = tape.reshape(gram, n * n, 1)?;
        let mapped = self.heads.subiso_outer.forward(tape, &self.store, entries)?;
        let probs = tape.sigmoid(mapped);
        Ok(tape.reshape(probs, n, n)?)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::from_store(self.config.to_meta(), &self.store)
    }

    /// Rebuilds a model from a checkpoint; the header decides the architecture.
    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self, GnnError> {
        let config = ModelConfig::from_meta(&ckpt.meta)?;
        if config.layers == 0 {
            return Err(GnnError::Header("layers must be at least 1".into()));
        }
        let mut model = Model::new(config, &mut rand_chacha::ChaCha8Rng::seed_from_u64(0));
        ckpt.load_into(&mut model.store)?;
        Ok(model)
    }
}

/// Gram matrix `X Xᵀ` of the rows of `x`.
pub fn autocor(tape: &mut Tape, x: Var) -> Result<Var, TensorError> {
    let xt = tape.transpose(x);
    tape.matmul(x, xt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(input: usize, seed: u64) -> Model {
        Model::new(ModelConfig::new(input), &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn featured(g: Graph, dim: usize) -> Graph {
        let n = g.num_nodes();
        let feats = (0..n).map(|v| (0..dim).map(|j| ((v * 7 + j * 3) % 5) as f64 / 5.0).collect()).collect();
        g.with_features(feats).unwrap()
    }

    #[test]
    fn zero_parameters_give_zero_embedding() {
        let mut m = model(3, 1);
        for p in m.store.iter_mut() {
            p.value.fill(0.0);
        }
        let g = featured(Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]), 3);
        let (z, _) = m.encode(&g).unwrap();
        assert!(z.data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn isolated_node_is_plain_perceptron_stack() {
        let m = model(2, 2);
        let g = Graph::from_edges(1, &[]).with_features(vec![vec![0.3, -0.7]]).unwrap();
        let (z, _) = m.encode(&g).unwrap();
        let mut x = Tensor::new(1, 2, vec![0.3, -0.7]).unwrap();
        for layer in &m.encoder.layers {
            for lin in [layer.mlp.first, layer.mlp.second] {
                let w = &m.store.get(lin.weight).value;
                let b = &m.store.get(lin.bias).value;
                x = x.matmul(w).unwrap().zip_map(b, |a, c| a + c);
                x = x.map(|v| v.max(0.0));
            }
        }
        for (a, b) in z.data().iter().zip(x.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn encode_is_permutation_invariant() {
        let m = model(3, 3);
        let g = featured(Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 1)]), 3);
        let perm = [3, 0, 4, 1, 2];
        let p = g.permute(&perm);
        let (z1, h1) = m.encode(&g).unwrap();
        let (z2, h2) = m.encode(&p).unwrap();
        for (a, b) in z1.data().iter().zip(z2.data()) {
            assert!((a - b).abs() < 1e-9);
        }
        for v in 0..5 {
            for (a, b) in h1.row(v).iter().zip(h2.row(perm[v])) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_projection_is_relu() {
        let mut m = model(2, 4);
        let d = m.config.embedding;
        for lin in [m.heads.projection.first, m.heads.projection.second] {
            m.store.get_mut(lin.weight).value = Tensor::identity(d);
        }
        let z: Vec<f64> = (0..d).map(|i| i as f64 - 10.0).collect();
        let mut tape = Tape::new();
        let zv = tape.constant(Tensor::new(1, d, z.clone()).unwrap());
        let out = m.project(&mut tape, zv).unwrap();
        let expected: Vec<f64> = z.iter().map(|x| x.max(0.0)).collect();
        assert_eq!(tape.value(out).data(), expected.as_slice());
    }

    #[test]
    fn zero_projection_weights_give_bias() {
        let mut m = model(2, 5);
        let d = m.config.embedding;
        let second = m.heads.projection.second;
        m.store.get_mut(second.weight).value.fill(0.0);
        m.store.get_mut(second.bias).value.fill(0.25);
        let mut tape = Tape::new();
        let zv = tape.constant(Tensor::filled(1, d, 3.0));
        let out = m.project(&mut tape, zv).unwrap();
        assert!(tape.value(out).data().iter().all(|&x| x == 0.25));
    }

    #[test]
    fn iso_head_range_and_zero_weights() {
        let mut m = model(2, 6);
        let d = m.config.embedding;
        let mut tape = Tape::new();
        let zi = tape.constant(Tensor::new(1, d, (0..d).map(|i| i as f64).collect()).unwrap());
        let zj = tape.constant(Tensor::filled(1, d, -2.0));
        let p = m.predict_iso(&mut tape, zi, zj).unwrap();
        let v = tape.value(p).item().unwrap();
        assert!(v > 0.0 && v < 1.0);

        m.store.get_mut(m.heads.iso.second.weight).value.fill(0.0);
        let mut tape = Tape::new();
        let zi = tape.constant(Tensor::filled(1, d, 1.0));
        let zj = tape.constant(Tensor::filled(1, d, 2.0));
        let p = m.predict_iso(&mut tape, zi, zj).unwrap();
        assert_eq!(tape.value(p).item().unwrap(), 0.5);
    }

    #[test]
    fn iso_head_is_order_sensitive() {
        // Search a few random initializations for a witness of asymmetry.
        let found = (0..10).any(|seed| {
            let m = model(2, 100 + seed);
            let d = m.config.embedding;
            let a = Tensor::new(1, d, (0..d).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
            let b = Tensor::new(1, d, (0..d).map(|i| (i as f64 * 0.11).cos()).collect()).unwrap();
            let mut tape = Tape::new();
            let (va, vb) = (tape.constant(a), tape.constant(b));
            let ab = m.predict_iso(&mut tape, va, vb).unwrap();
            let ba = m.predict_iso(&mut tape, vb, va).unwrap();
            (tape.value(ab).item().unwrap() - tape.value(ba).item().unwrap()).abs() > 1e-6
        });
        assert!(found);
    }

    #[test]
    fn autocor_cases() {
        let mut tape = Tape::new();
        let eye = tape.constant(Tensor::identity(3));
        let g = autocor(&mut tape, eye).unwrap();
        assert_eq!(tape.value(g), &Tensor::identity(3));
        let x = tape.constant(Tensor::new(2, 2, vec![1.0, 0.0, 1.0, 0.0]).unwrap());
        let g = autocor(&mut tape, x).unwrap();
        assert_eq!(tape.value(g).data(), &[1.0; 4]);
    }

    #[test]
    fn subiso_head_shape_and_zero_weights() {
        let mut m = model(3, 7);
        let g = featured(Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]), 3);
        let (_, h) = m.encode(&g).unwrap();
        let mut tape = Tape::new();
        let hv = tape.constant(h.clone());
        let out = m.predict_subiso(&mut tape, hv).unwrap();
        assert_eq!(tape.value(out).shape(), (4, 4));
        assert!(tape.value(out).data().iter().all(|&x| x > 0.0 && x < 1.0));

        m.store.get_mut(m.heads.subiso_outer.second.weight).value.fill(0.0);
        let mut tape = Tape::new();
        let hv = tape.constant(h);
        let out = m.predict_subiso(&mut tape, hv).unwrap();
        assert!(tape.value(out).data().iter().all(|&x| x == 0.5));
    }

    #[test]
    fn subiso_head_is_permutation_equivariant() {
        let m = model(3, 8);
        let h = Tensor::new(3, 32, (0..96).map(|i| ((i * 13) % 17) as f64 / 17.0 - 0.3).collect()).unwrap();
        let perm = [2, 0, 1];
        let mut permuted = Tensor::zeros(3, 32);
        for v in 0..3 {
            for j in 0..32 {
                permuted.set(perm[v], j, h.get(v, j));
            }
        }
        let mut tape = Tape::new();
        let (a, b) = (tape.constant(h), tape.constant(permuted));
        let ya = m.predict_subiso(&mut tape, a).unwrap();
        let yb = m.predict_subiso(&mut tape, b).unwrap();
        for v in 0..3 {
            for u in 0..3 {
                let diff = tape.value(ya).get(v, u) - tape.value(yb).get(perm[v], perm[u]);
                assert!(diff.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn feature_dimension_mismatch() {
        let m = model(3, 9);
        let g = featured(Graph::from_edges(2, &[(0, 1)]), 4);
        assert_eq!(m.encode(&g).unwrap_err(), GnnError::Dimension { expected: 3, found: 4 });
    }

    #[test]
    fn checkpoint_roundtrip() {
        let m = model(7, 10);
        let text = m.checkpoint().to_text();
        let back = Model::from_checkpoint(&Checkpoint::parse(&text).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
