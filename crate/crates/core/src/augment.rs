//! Stochastic graph augmentations used to build the two contrastive views.
//!
//! Every function takes the random stream explicitly; identical
//! `(graph, ratio, stream state)` give identical outputs.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphBuilder};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AugmentError {
    #[error("augmentation ratio must lie in [0, 1), got {0}")]
    Ratio(f64),
    #[error("cannot augment a graph with no nodes")]
    EmptyGraph,
    #[error("attribute masking needs node features")]
    MissingFeatures,
    #[error("fill vector has dimension {found}, features have {expected}")]
    FillDim { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentKind {
    NodeDrop,
    EdgePerturb,
    AttrMask,
    Subgraph,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentSpec {
    pub kind: AugmentKind,
    #[serde(default)]
    pub ratio: f64,
}

impl AugmentSpec {
    pub fn new(kind: AugmentKind, ratio: f64) -> Self {
        Self { kind, ratio }
    }

    pub fn identity() -> Self {
        Self { kind: AugmentKind::Identity, ratio: 0.0 }
    }

    pub fn check(&self) -> Result<(), AugmentError> {
        if self.kind == AugmentKind::Identity {
            return Ok(());
        }
        check_ratio(self.ratio)
    }

    /// `mask_fill` is the replacement row for attribute masking, usually the
    /// dataset mean feature vector.
    pub fn apply<R: Rng + ?Sized>(&self, g: &Graph, mask_fill: &[f64], rng: &mut R) -> Result<Graph, AugmentError> {
        match self.kind {
            AugmentKind::NodeDrop => node_drop(g, self.ratio, rng),
            AugmentKind::EdgePerturb => edge_perturb(g, self.ratio, rng),
            AugmentKind::AttrMask => attr_mask(g, self.ratio, mask_fill, rng),
            AugmentKind::Subgraph => subgraph_sample(g, self.ratio, rng),
            AugmentKind::Identity => Ok(g.clone()),
        }
    }
}

impl Default for AugmentSpec {
    fn default() -> Self {
        Self { kind: AugmentKind::NodeDrop, ratio: 0.2 }
    }
}

fn check_ratio(ratio: f64) -> Result<(), AugmentError> {
    if (0.0..1.0).contains(&ratio) {
        Ok(())
    } else {
        Err(AugmentError::Ratio(ratio))
    }
}

fn count(ratio: f64, total: usize) -> usize {
    (ratio * total as f64).floor() as usize
}

/// Deletes `floor(ratio * n)` uniformly chosen nodes, keeping at least one.
pub fn node_drop<R: Rng + ?Sized>(g: &Graph, ratio: f64, rng: &mut R) -> Result<Graph, AugmentError> {
    check_ratio(ratio)?;
    let n = g.num_nodes();
    if n == 0 {
        return Err(AugmentError::EmptyGraph);
    }
    let drop = count(ratio, n).min(n - 1);
    let mut dropped = vec![false; n];
    for v in sample(rng, n, drop) {
        dropped[v] = true;
    }
    let keep: Vec<usize> = (0..n).filter(|&v| !dropped[v]).collect();
    Ok(g.induced(&keep))
}

/// Deletes `floor(ratio * |E|)` edges and inserts as many edges drawn from
/// the non-edges of the input graph (fewer when there are not enough).
pub fn edge_perturb<R: Rng + ?Sized>(g: &Graph, ratio: f64, rng: &mut R) -> Result<Graph, AugmentError> {
    check_ratio(ratio)?;
    let m = g.num_edges();
    let k = count(ratio, m);
    if k == 0 {
        return Ok(g.clone());
    }
    let mut removed = vec![false; m];
    for i in sample(rng, m, k) {
        removed[i] = true;
    }
    let n = g.num_nodes();
    let mut non_edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if !g.has_edge(u, v) {
                non_edges.push((u, v));
            }
        }
    }
    let add = k.min(non_edges.len());
    let mut added: Vec<(usize, usize)> = sample(rng, non_edges.len(), add).into_iter().map(|i| non_edges[i]).collect();
    added.sort_unstable();

    let mut b = g.to_builder();
    b.edges = g
        .edges()
        .iter()
        .zip(&removed)
        .filter(|(_, &r)| !r)
        .map(|(&e, _)| e)
        .chain(added)
        .collect();
    Ok(b.build().expect("perturbed edges stay simple"))
}

/// Replaces the feature rows of `floor(ratio * n)` uniformly chosen nodes with `fill`.
pub fn attr_mask<R: Rng + ?Sized>(g: &Graph, ratio: f64, fill: &[f64], rng: &mut R) -> Result<Graph, AugmentError> {
    check_ratio(ratio)?;
    let features = g.node_features().ok_or(AugmentError::MissingFeatures)?;
    let dim = g.feature_dim().unwrap_or(0);
    if fill.len() != dim {
        return Err(AugmentError::FillDim { expected: dim, found: fill.len() });
    }
    let n = g.num_nodes();
    let mut rows = features.to_vec();
    for v in sample(rng, n, count(ratio, n)) {
        rows[v] = fill.to_vec();
    }
    let mut b: GraphBuilder = g.to_builder();
    b.node_features = Some(rows);
    Ok(b.build().expect("masking keeps topology"))
}

/// Random walk from a uniform start until `ceil((1 - ratio) * n)` distinct
/// nodes are visited, then returns the induced subgraph.
///
/// When the walker sits on a node with no unvisited neighbor it restarts at a
/// uniform visited node that still has one; if no visited node has one (the
/// component is exhausted) it jumps to a uniform unvisited node.
pub fn subgraph_sample<R: Rng + ?Sized>(g: &Graph, ratio: f64, rng: &mut R) -> Result<Graph, AugmentError> {
    check_ratio(ratio)?;
    let n = g.num_nodes();
    if n == 0 {
        return Err(AugmentError::EmptyGraph);
    }
    let target = (((1.0 - ratio) * n as f64).ceil() as usize).clamp(1, n);
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(target);
    let mut current = rng.gen_range(0..n);
    visited[current] = true;
    order.push(current);

    let has_fresh = |v: usize, visited: &[bool]| g.neighbors(v).iter().any(|&u| !visited[u]);
    while order.len() < target {
        if !has_fresh(current, &visited) {
            let frontier: Vec<usize> = order.iter().copied().filter(|&v| has_fresh(v, &visited)).collect();
            current = if frontier.is_empty() {
                let unvisited: Vec<usize> = (0..n).filter(|&v| !visited[v]).collect();
                let next = unvisited[rng.gen_range(0..unvisited.len())];
                visited[next] = true;
                order.push(next);
                next
            } else {
                frontier[rng.gen_range(0..frontier.len())]
            };
            continue;
        }
        let neigh = g.neighbors(current);
        current = neigh[rng.gen_range(0..neigh.len())];
        if !visited[current] {
            visited[current] = true;
            order.push(current);
        }
    }
    let mut keep = order;
    keep.sort_unstable();
    Ok(g.induced(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn triangle() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)])
    }

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges)
    }

    #[test]
    fn node_drop_ratio_zero_is_identity() {
        let g = path(6);
        assert_eq!(node_drop(&g, 0.0, &mut rng(1)).unwrap(), g);
    }

    #[test]
    fn node_drop_triangle_leaves_an_edge() {
        for seed in 0..20 {
            let out = node_drop(&triangle(), 0.34, &mut rng(seed)).unwrap();
            assert_eq!((out.num_nodes(), out.num_edges()), (2, 1));
        }
    }

    #[test]
    fn node_drop_counts_and_floor() {
        let out = node_drop(&path(10), 0.2, &mut rng(3)).unwrap();
        assert_eq!(out.num_nodes(), 8);
        let single = Graph::from_edges(1, &[]);
        assert_eq!(node_drop(&single, 0.99, &mut rng(0)).unwrap().num_nodes(), 1);
        assert_eq!(node_drop(&Graph::from_edges(0, &[]), 0.1, &mut rng(0)), Err(AugmentError::EmptyGraph));
        assert_eq!(node_drop(&triangle(), 1.0, &mut rng(0)), Err(AugmentError::Ratio(1.0)));
    }

    #[test]
    fn edge_perturb_cases() {
        let g = path(3);
        assert_eq!(edge_perturb(&g, 0.0, &mut rng(0)).unwrap(), g);
        let k4 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let out = edge_perturb(&k4, 0.2, &mut rng(5)).unwrap();
        assert_eq!(out.num_edges(), 5);
        for seed in 0..10 {
            let out = edge_perturb(&g, 0.5, &mut rng(seed)).unwrap();
            assert_eq!(out.num_edges(), 2);
            assert_eq!(out.num_nodes(), 3);
            assert!(out.has_edge(0, 2));
        }
    }

    #[test]
    fn attr_mask_cases() {
        let feats: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 1.0]).collect();
        let g = path(5).with_features(feats.clone()).unwrap();
        let fill = [-1.0, -1.0];
        assert_eq!(attr_mask(&g, 0.0, &fill, &mut rng(0)).unwrap(), g);
        let out = attr_mask(&g, 0.4, &fill, &mut rng(2)).unwrap();
        let masked = out.node_features().unwrap().iter().filter(|r| r.as_slice() == fill).count();
        assert_eq!(masked, 2);
        assert_eq!(out.edges(), g.edges());

        let ones = path(5).with_features(vec![vec![1.0; 3]; 5]).unwrap();
        assert_eq!(attr_mask(&ones, 0.6, &[1.0; 3], &mut rng(9)).unwrap(), ones);
        assert_eq!(attr_mask(&path(3), 0.5, &[], &mut rng(0)), Err(AugmentError::MissingFeatures));
    }

    #[test]
    fn subgraph_cases() {
        let g = path(7);
        assert_eq!(subgraph_sample(&g, 0.0, &mut rng(4)).unwrap(), g);
        for seed in 0..20 {
            let out = subgraph_sample(&triangle(), 0.34, &mut rng(seed)).unwrap();
            assert_eq!((out.num_nodes(), out.num_edges()), (2, 1));
        }
        let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).with_labels(vec![9, 0, 0, 0, 0]).unwrap();
        for seed in 0..30 {
            // ceil(0.6 * 5) = 3 nodes.
            let out = subgraph_sample(&star, 0.4, &mut rng(seed)).unwrap();
            assert_eq!(out.num_nodes(), 3);
            assert!(out.node_labels().contains(&9));
        }
    }

    #[test]
    fn subgraph_on_disconnected_graph_terminates() {
        let g = Graph::from_edges(6, &[(0, 1), (2, 3)]);
        for seed in 0..20 {
            assert_eq!(subgraph_sample(&g, 0.1, &mut rng(seed)).unwrap().num_nodes(), 6);
        }
    }

    #[test]
    fn spec_roundtrips_through_toml() {
        let spec = AugmentSpec::new(AugmentKind::EdgePerturb, 0.1);
        let text = toml::to_string(&spec).unwrap();
        assert_eq!(toml::from_str::<AugmentSpec>(&text).unwrap(), spec);
    }
}
