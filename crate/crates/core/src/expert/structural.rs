//! Structural coefficients of overlap subgraphs.
//!
//! For adjacent `v`, `u` the overlap subgraph is the intersection of the
//! closed neighborhoods of `v` and `u` (nodes and induced edges). Its
//! coefficient is `|E| / (|V| (|V| - 1)) * |V|^lambda`; rows are then
//! normalized over each node's neighbors.

use super::ExpertError;
use crate::graph::Graph;

/// Closed neighborhood of a node: the node, its neighbors, and every edge
/// among them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalSubgraph {
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlapSize {
    pub node_count: usize,
    pub edge_count: usize,
}

fn closed_neighborhood(g: &Graph, v: usize) -> Vec<usize> {
    let mut nodes: Vec<usize> = g.neighbors(v).to_vec();
    let pos = nodes.binary_search(&v).unwrap_err();
    nodes.insert(pos, v);
    nodes
}

fn induced_edges(g: &Graph, nodes: &[usize]) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for (i, &a) in nodes.iter().enumerate() {
        for &b in &nodes[i + 1..] {
            if g.has_edge(a, b) {
                edges.push((a, b));
            }
        }
    }
    edges
}

fn check_node(g: &Graph, v: usize) -> Result<(), ExpertError> {
    if v < g.num_nodes() {
        Ok(())
    } else {
        Err(ExpertError::NodeIndex { index: v, num_nodes: g.num_nodes() })
    }
}

pub fn neighborhood_subgraph(g: &Graph, v: usize) -> Result<LocalSubgraph, ExpertError> {
    check_node(g, v)?;
    let nodes = closed_neighborhood(g, v);
    let edges = induced_edges(g, &nodes);
    Ok(LocalSubgraph { nodes, edges })
}

/// Size of the overlap subgraph of the edge `{v, u}`.
pub fn overlap_subgraph(g: &Graph, v: usize, u: usize) -> Result<OverlapSize, ExpertError> {
    check_node(g, v)?;
    check_node(g, u)?;
    if !g.has_edge(v, u) {
        return Err(ExpertError::NotAdjacent { v, u });
    }
    let nv = closed_neighborhood(g, v);
    let nu = closed_neighborhood(g, u);
    let common: Vec<usize> = nv.iter().copied().filter(|x| nu.binary_search(x).is_ok()).collect();
    // An edge lies in both neighborhood subgraphs iff both endpoints lie in
    // both node sets, so the edge intersection is the induced edge set.
    let edge_count = induced_edges(g, &common).len();
    Ok(OverlapSize { node_count: common.len(), edge_count })
}

pub fn structural_coefficient(node_count: usize, edge_count: usize, lambda: f64) -> Result<f64, ExpertError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ExpertError::Lambda(lambda));
    }
    if node_count < 2 || edge_count < 1 {
        return Err(ExpertError::DegenerateOverlap { node_count, edge_count });
    }
    let n = node_count as f64;
    Ok(edge_count as f64 / (n * (n - 1.0)) * n.powf(lambda))
}

/// Raw and row-normalized coefficients, stored as one sorted row of
/// `(neighbor, value)` per node. Rows of isolated nodes are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralCoefficients {
    pub raw: Vec<Vec<(usize, f64)>>,
    pub normalized: Vec<Vec<(usize, f64)>>,
    pub lambda: f64,
}

impl StructuralCoefficients {
    pub fn num_nodes(&self) -> usize {
        self.raw.len()
    }

    /// Row-major `n x n` view of the normalized matrix, zero off the adjacency.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.num_nodes();
        let mut out = vec![0.0; n * n];
        for (v, row) in self.normalized.iter().enumerate() {
            for &(u, w) in row {
                out[v * n + u] = w;
            }
        }
        out
    }

    /// `(v, u, normalized)` for every stored entry, row by row.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.normalized.iter().enumerate().flat_map(|(v, row)| row.iter().map(move |&(u, w)| (v, u, w)))
    }

    pub fn get(&self, v: usize, u: usize) -> Option<f64> {
        let row = self.normalized.get(v)?;
        row.binary_search_by_key(&u, |&(k, _)| k).ok().map(|i| row[i].1)
    }
}

pub fn structural_matrix(g: &Graph, lambda: f64) -> Result<StructuralCoefficients, ExpertError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ExpertError::Lambda(lambda));
    }
    let n = g.num_nodes();
    let mut raw = vec![Vec::new(); n];
    for &(v, u) in g.edges() {
        let size = overlap_subgraph(g, v, u)?;
        let w = structural_coefficient(size.node_count, size.edge_count, lambda)?;
        raw[v].push((u, w));
        raw[u].push((v, w));
    }
    for row in &mut raw {
        row.sort_by_key(|&(u, _)| u);
    }
    let normalized = raw
        .iter()
        .map(|row| {
            let total: f64 = row.iter().map(|&(_, w)| w).sum();
            row.iter().map(|&(u, w)| (u, w / total)).collect()
        })
        .collect();
    Ok(StructuralCoefficients { raw, normalized, lambda })
}
