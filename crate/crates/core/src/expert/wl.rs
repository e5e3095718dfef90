//! 1-dimensional Weisfeiler-Lehman refinement and the Jaccard similarity of
//! the resulting label sets.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::ExpertError;
use crate::graph::Graph;

/// Which refinement rounds contribute to a graph's label set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSetPolicy {
    /// Labels present after the last round only.
    #[default]
    FinalIteration,
    /// Labels from rounds `0..=k` (WL subtree kernel convention).
    AllIterations,
}

/// Source of the round-0 labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialLabels {
    #[default]
    NodeLabels,
    Degree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WlConfig {
    pub iterations: usize,
    pub policy: LabelSetPolicy,
    pub initial: InitialLabels,
}

impl WlConfig {
    pub fn new(iterations: usize) -> Self {
        Self { iterations, policy: LabelSetPolicy::default(), initial: InitialLabels::default() }
    }

    pub fn with_policy(mut self, policy: LabelSetPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_initial(mut self, initial: InitialLabels) -> Self {
        self.initial = initial;
        self
    }
}

type Signature = (u32, Vec<u32>);

/// Injective signature compression. Labels are handed out as 0, 1, 2, ... in
/// first-encounter order.
#[derive(Debug, Clone, Default)]
pub struct WlLabelTable {
    map: HashMap<Signature, u32>,
    next_label: u32,
}

impl WlLabelTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn next_label(&self) -> u32 {
        self.next_label
    }

    pub fn compress(&mut self, own: u32, mut neighbors: Vec<u32>) -> u32 {
        neighbors.sort_unstable();
        let next = &mut self.next_label;
        *self.map.entry((own, neighbors)).or_insert_with(|| {
            let label = *next;
            *next += 1;
            label
        })
    }
}

/// One refinement round over `graphs`, visiting graphs in order and nodes by
/// index. The table is shared, so labels are comparable across the graphs.
pub fn wl_refine_once(
    graphs: &[&Graph],
    labels: &[Vec<u32>],
    table: &mut WlLabelTable,
) -> Result<Vec<Vec<u32>>, ExpertError> {
    let mut out = Vec::with_capacity(graphs.len());
    for (gi, (g, current)) in graphs.iter().zip(labels).enumerate() {
        if current.len() != g.num_nodes() {
            return Err(ExpertError::LabelLength { graph: gi, expected: g.num_nodes(), found: current.len() });
        }
        let next = (0..g.num_nodes())
            .map(|v| {
                let neigh = g.neighbors(v).iter().map(|&u| current[u]).collect();
                table.compress(current[v], neigh)
            })
            .collect();
        out.push(next);
    }
    Ok(out)
}

/// Refinement history for one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct WlResult {
    /// `rounds[t][v]` is the label of node `v` after round `t`; round 0 holds
    /// the initial labels.
    pub rounds: Vec<Vec<u32>>,
    /// Labels tagged with the round that produced them.
    pub label_set: BTreeSet<(usize, u32)>,
    pub iterations: usize,
}

fn initial_labels(g: &Graph, initial: InitialLabels) -> Vec<u32> {
    match initial {
        InitialLabels::NodeLabels => g.node_labels().to_vec(),
        InitialLabels::Degree => (0..g.num_nodes()).map(|v| g.neighbors(v).len() as u32).collect(),
    }
}

/// Runs `config.iterations` rounds jointly over `graphs`, with one fresh
/// table per round shared by all of them.
pub fn wl_refine(graphs: &[&Graph], config: &WlConfig) -> Result<Vec<WlResult>, ExpertError> {
    if config.iterations == 0 {
        return Err(ExpertError::NoIterations);
    }
    let mut history: Vec<Vec<Vec<u32>>> =
        graphs.iter().map(|g| vec![initial_labels(g, config.initial)]).collect();
    let mut current: Vec<Vec<u32>> = history.iter().map(|h| h[0].clone()).collect();
    for _ in 0..config.iterations {
        let mut table = WlLabelTable::new();
        current = wl_refine_once(graphs, &current, &mut table)?;
        for (h, labels) in history.iter_mut().zip(&current) {
            h.push(labels.clone());
        }
    }
    Ok(history
        .into_iter()
        .map(|rounds| {
            let retained = match config.policy {
                LabelSetPolicy::FinalIteration => config.iterations..=config.iterations,
                LabelSetPolicy::AllIterations => 0..=config.iterations,
            };
            let label_set = retained.flat_map(|t| rounds[t].iter().map(move |&l| (t, l))).collect();
            WlResult { rounds, label_set, iterations: config.iterations }
        })
        .collect())
}

/// Jaccard coefficient of two WL label sets, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct IsoSimilarity(f64);

impl IsoSimilarity {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Graph-tier similarity of two graphs: Jaccard coefficient of their WL
/// label sets under a table shared between just these two graphs.
pub fn iso_similarity(gi: &Graph, gj: &Graph, config: &WlConfig) -> Result<IsoSimilarity, ExpertError> {
    if gi.num_nodes() == 0 {
        return Err(ExpertError::EmptyGraph(0));
    }
    if gj.num_nodes() == 0 {
        return Err(ExpertError::EmptyGraph(1));
    }
    let results = wl_refine(&[gi, gj], config)?;
    Ok(IsoSimilarity(jaccard(&results[0].label_set, &results[1].label_set)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)])
    }

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)])
    }

    #[test]
    fn triangle_refines_to_one_label() {
        let g = triangle();
        let mut table = WlLabelTable::new();
        let out = wl_refine_once(&[&g], &[vec![0, 0, 0]], &mut table).unwrap();
        assert_eq!(out, vec![vec![0, 0, 0]]);
        assert_eq!(table.len(), 1);
    }

    #[test]
    fn path_endpoints_share_a_label() {
        let g = path3();
        let mut table = WlLabelTable::new();
        let out = wl_refine_once(&[&g], &[vec![0, 0, 0]], &mut table).unwrap();
        // (0,{0}) is met first at node 0, then (0,{0,0}) at node 1.
        assert_eq!(out, vec![vec![0, 1, 0]]);
    }

    #[test]
    fn isolated_node_gets_empty_signature_label() {
        let g = Graph::from_edges(2, &[]);
        let mut table = WlLabelTable::new();
        let out = wl_refine_once(&[&g], &[vec![3, 4]], &mut table).unwrap();
        assert_eq!(out, vec![vec![0, 1]]);
        let again = wl_refine_once(&[&g], &[vec![3, 4]], &mut WlLabelTable::new()).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn label_length_mismatch_is_an_error() {
        let g = path3();
        assert!(wl_refine_once(&[&g], &[vec![0]], &mut WlLabelTable::new()).is_err());
    }

    #[test]
    fn triangle_vs_path_one_round() {
        let sim = iso_similarity(&triangle(), &path3(), &WlConfig::new(1)).unwrap();
        assert_eq!(sim.value(), 0.5);
    }

    #[test]
    fn six_cycle_vs_two_triangles_is_blind_spot() {
        let c6 = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]);
        let tt = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        for k in 1..=4 {
            assert_eq!(iso_similarity(&c6, &tt, &WlConfig::new(k)).unwrap().value(), 1.0);
        }
    }

    #[test]
    fn all_iterations_policy_includes_round_zero() {
        let cfg = WlConfig::new(1).with_policy(LabelSetPolicy::AllIterations);
        // triangle {(0,0),(1,0)}; path {(0,0),(1,1),(1,0)}. Intersection 2, union 3.
        let sim = iso_similarity(&triangle(), &path3(), &cfg).unwrap();
        assert!((sim.value() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn degree_initial_labels() {
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        let cfg = WlConfig::new(1).with_initial(InitialLabels::Degree);
        let res = wl_refine(&[&star], &cfg).unwrap();
        assert_eq!(res[0].rounds[0], vec![3, 1, 1, 1]);
    }

    #[test]
    fn empty_graph_rejected() {
        let empty = Graph::from_edges(0, &[]);
        assert_eq!(iso_similarity(&empty, &triangle(), &WlConfig::new(1)), Err(ExpertError::EmptyGraph(0)));
        assert_eq!(iso_similarity(&triangle(), &triangle(), &WlConfig::new(0)), Err(ExpertError::NoIterations));
    }

    #[test]
    fn identical_graphs_score_one() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (1, 4)]).with_labels(vec![1, 2, 1, 0, 2]).unwrap();
        assert_eq!(iso_similarity(&g, &g, &WlConfig::new(3)).unwrap().value(), 1.0);
    }
}
