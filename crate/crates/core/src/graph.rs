//! Immutable undirected labeled graphs and dataset bundles.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("node index {index} out of range for graph with {num_nodes} nodes")]
    NodeIndex { index: usize, num_nodes: usize },
    #[error("graph is invalid: {0}")]
    Invalid(ValidationReport),
    #[error("graph has no nodes")]
    Empty,
    #[error("node features missing")]
    MissingFeatures,
}

/// One broken invariant found by [`Graph::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    SelfLoop { node: usize },
    DuplicateEdge { u: usize, v: usize },
    EndpointOutOfRange { u: usize, v: usize, num_nodes: usize },
    LabelCount { expected: usize, found: usize },
    FeatureCount { expected: usize, found: usize },
    FeatureDim { node: usize, expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop { node } => write!(f, "self-loop on node {node}"),
            Violation::DuplicateEdge { u, v } => write!(f, "duplicate edge {{{u},{v}}}"),
            Violation::EndpointOutOfRange { u, v, num_nodes } => {
                write!(f, "edge {{{u},{v}}} has an endpoint outside [0, {num_nodes})")
            }
            Violation::LabelCount { expected, found } => {
                write!(f, "expected {expected} node labels, found {found}")
            }
            Violation::FeatureCount { expected, found } => {
                write!(f, "expected {expected} feature rows, found {found}")
            }
            Violation::FeatureDim { node, expected, found } => {
                write!(f, "feature row {node} has dimension {found}, expected {expected}")
            }
        }
    }
}

/// Every violation found in one graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Unchecked graph description. Turn it into a [`Graph`] with [`GraphBuilder::build`].
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    pub num_nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub node_labels: Option<Vec<u32>>,
    pub node_features: Option<Vec<Vec<f64>>>,
    pub graph_label: Option<usize>,
}

impl GraphBuilder {
    pub fn new(num_nodes: usize) -> Self {
        Self { num_nodes, ..Default::default() }
    }

    pub fn edges<I: IntoIterator<Item = (usize, usize)>>(mut self, edges: I) -> Self {
        self.edges.extend(edges);
        self
    }

    pub fn labels(mut self, labels: Vec<u32>) -> Self {
        self.node_labels = Some(labels);
        self
    }

    pub fn features(mut self, features: Vec<Vec<f64>>) -> Self {
        self.node_features = Some(features);
        self
    }

    pub fn graph_label(mut self, label: usize) -> Self {
        self.graph_label = Some(label);
        self
    }

    /// Reports every invariant violation without building anything.
    pub fn validate(&self) -> ValidationReport {
        let n = self.num_nodes;
        let mut violations = Vec::new();
        let mut seen = BTreeSet::new();
        for &(u, v) in &self.edges {
            if u >= n || v >= n {
                violations.push(Violation::EndpointOutOfRange { u, v, num_nodes: n });
                continue;
            }
            if u == v {
                violations.push(Violation::SelfLoop { node: u });
                continue;
            }
            if !seen.insert((u.min(v), u.max(v))) {
                violations.push(Violation::DuplicateEdge { u: u.min(v), v: u.max(v) });
            }
        }
        if let Some(labels) = &self.node_labels {
            if labels.len() != n {
                violations.push(Violation::LabelCount { expected: n, found: labels.len() });
            }
        }
        if let Some(features) = &self.node_features {
            if features.len() != n {
                violations.push(Violation::FeatureCount { expected: n, found: features.len() });
            }
            if let Some(first) = features.first() {
                let dim = first.len();
                for (node, row) in features.iter().enumerate() {
                    if row.len() != dim {
                        violations.push(Violation::FeatureDim { node, expected: dim, found: row.len() });
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn build(self) -> Result<Graph, GraphError> {
        let report = self.validate();
        if !report.is_ok() {
            return Err(GraphError::Invalid(report));
        }
        Ok(self.build_unchecked())
    }

    /// Builds after collapsing duplicate and reversed edges; self-loops and
    /// out-of-range endpoints are still rejected.
    pub fn build_dedup(mut self) -> Result<Graph, GraphError> {
        let set: BTreeSet<(usize, usize)> = self.edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        self.edges = set.into_iter().collect();
        self.build()
    }

    fn build_unchecked(self) -> Graph {
        let n = self.num_nodes;
        let mut edges: Vec<(usize, usize)> = self.edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        edges.sort_unstable();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Graph {
            edges,
            adjacency,
            node_labels: self.node_labels.unwrap_or_else(|| vec![0; n]),
            node_features: self.node_features,
            graph_label: self.graph_label,
        }
    }
}

/// Undirected simple graph. Edges are stored once as `(min, max)` pairs in
/// sorted order; adjacency lists are sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    node_labels: Vec<u32>,
    node_features: Option<Vec<Vec<f64>>>,
    graph_label: Option<usize>,
}

impl Graph {
    /// Unlabeled graph from an edge list; panics on invalid input. Meant for
    /// fixtures and examples.
    pub fn from_edges(num_nodes: usize, edges: &[(usize, usize)]) -> Graph {
        GraphBuilder::new(num_nodes).edges(edges.iter().copied()).build().expect("invalid edge list")
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn node_labels(&self) -> &[u32] {
        &self.node_labels
    }

    pub fn node_features(&self) -> Option<&[Vec<f64>]> {
        self.node_features.as_deref()
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.node_features.as_ref().and_then(|f| f.first().map(Vec::len))
    }

    pub fn graph_label(&self) -> Option<usize> {
        self.graph_label
    }

    pub fn degree(&self, v: usize) -> Result<usize, GraphError> {
        self.check_node(v)?;
        Ok(self.adjacency[v].len())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_nodes() && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn check_node(&self, v: usize) -> Result<(), GraphError> {
        if v < self.num_nodes() {
            Ok(())
        } else {
            Err(GraphError::NodeIndex { index: v, num_nodes: self.num_nodes() })
        }
    }

    /// Re-checks every invariant. Graphs built through [`GraphBuilder`] always pass.
    pub fn validate(&self) -> ValidationReport {
        self.to_builder().validate()
    }

    pub fn to_builder(&self) -> GraphBuilder {
        GraphBuilder {
            num_nodes: self.num_nodes(),
            edges: self.edges.clone(),
            node_labels: Some(self.node_labels.clone()),
            node_features: self.node_features.clone(),
            graph_label: self.graph_label,
        }
    }

    pub fn with_features(&self, features: Vec<Vec<f64>>) -> Result<Graph, GraphError> {
        let mut b = self.to_builder();
        b.node_features = Some(features);
        b.build()
    }

    pub fn with_labels(&self, labels: Vec<u32>) -> Result<Graph, GraphError> {
        self.to_builder().labels(labels).build()
    }

    /// Subgraph induced on `keep` (in the given order), with nodes renumbered
    /// to `0..keep.len()` and labels/features carried over.
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let mut position = vec![usize::MAX; self.num_nodes()];
        for (new, &old) in keep.iter().enumerate() {
            position[old] = new;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| position[u] != usize::MAX && position[v] != usize::MAX)
            .map(|&(u, v)| (position[u], position[v]));
        GraphBuilder {
            num_nodes: keep.len(),
            edges: edges.collect(),
            node_labels: Some(keep.iter().map(|&v| self.node_labels[v]).collect()),
            node_features: self.node_features.as_ref().map(|f| keep.iter().map(|&v| f[v].clone()).collect()),
            graph_label: self.graph_label,
        }
        .build_unchecked()
    }

    /// `perm[v]` is the new index of node `v`.
    pub fn permute(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.num_nodes(), "permutation length");
        let n = self.num_nodes();
        let mut labels = vec![0; n];
        let mut features = self.node_features.as_ref().map(|_| vec![Vec::new(); n]);
        for v in 0..n {
            labels[perm[v]] = self.node_labels[v];
            if let (Some(out), Some(src)) = (features.as_mut(), self.node_features.as_ref()) {
                out[perm[v]] = src[v].clone();
            }
        }
        GraphBuilder {
            num_nodes: n,
            edges: self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect(),
            node_labels: Some(labels),
            node_features: features,
            graph_label: self.graph_label,
        }
        .build_unchecked()
    }

    /// Dense 0/1 adjacency, row-major.
    pub fn dense_adjacency(&self) -> Vec<f64> {
        let n = self.num_nodes();
        let mut a = vec![0.0; n * n];
        for &(u, v) in &self.edges {
            a[u * n + v] = 1.0;
            a[v * n + u] = 1.0;
        }
        a
    }
}

/// A loaded dataset of graphs plus the vocabulary needed to interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub name: String,
    pub graphs: Vec<Graph>,
    pub label_vocab_size: usize,
    pub class_count: usize,
    /// `class_map[k]` is the raw class value that dense class `k` came from.
    pub class_map: Vec<i64>,
    /// False when the source had no node-label file.
    pub has_node_labels: bool,
}

impl DatasetBundle {
    pub fn labels(&self) -> Vec<usize> {
        self.graphs.iter().map(|g| g.graph_label().unwrap_or(0)).collect()
    }

    pub fn feature_dim(&self) -> usize {
        self.graphs.iter().find_map(Graph::feature_dim).unwrap_or(0)
    }

    pub fn mean_nodes(&self) -> f64 {
        if self.graphs.is_empty() {
            return 0.0;
        }
        self.graphs.iter().map(|g| g.num_nodes() as f64).sum::<f64>() / self.graphs.len() as f64
    }

    /// Mean feature vector over every node of every graph.
    pub fn feature_mean(&self) -> Vec<f64> {
        let dim = self.feature_dim();
        let mut mean = vec![0.0; dim];
        let mut count = 0usize;
        for g in &self.graphs {
            if let Some(rows) = g.node_features() {
                for row in rows {
                    for (m, x) in mean.iter_mut().zip(row) {
                        *m += x;
                    }
                    count += 1;
                }
            }
        }
        if count > 0 {
            mean.iter_mut().for_each(|m| *m /= count as f64);
        }
        mean
    }

    /// Validates every graph plus the bundle-level label ranges.
    pub fn validate(&self) -> Vec<(usize, ValidationReport)> {
        let mut out = Vec::new();
        for (i, g) in self.graphs.iter().enumerate() {
            let report = g.validate();
            if !report.is_ok() {
                out.push((i, report));
            }
        }
        out
    }
}

/// One-hot rows of `labels` over a vocabulary of `vocab` entries.
pub fn one_hot(labels: &[u32], vocab: usize) -> Vec<Vec<f64>> {
    labels
        .iter()
        .map(|&l| {
            let mut row = vec![0.0; vocab];
            if (l as usize) < vocab {
                row[l as usize] = 1.0;
            }
            row
        })
        .collect()
}
