//! Subgraph-tier expertise: overlap subgraphs and normalized structural
//! coefficients of every edge.
//!
//! cargo run --example structural_coefficients [lambda]

use isogcl::expert::{overlap_subgraph, structural_matrix};
use isogcl::graph::Graph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lambda: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1.0);
    // A triangle 0-1-2 with a pendant path 2-3-4 and a chord 1-3.
    let g = Graph::from_edges(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (1, 3)]);
    println!("edge     |V|  |E|");
    for &(v, u) in g.edges() {
        let o = overlap_subgraph(&g, v, u)?;
        println!("({v}, {u})   {:>3}  {:>3}", o.node_count, o.edge_count);
    }
    let s = structural_matrix(&g, lambda)?;
    println!("\nnormalized coefficients (lambda = {lambda}):");
    for v in 0..g.num_nodes() {
        let row: Vec<String> = (0..g.num_nodes()).map(|u| format!("{:.3}", s.get(v, u).unwrap_or(0.0))).collect();
        println!("  {}", row.join("  "));
    }
    Ok(())
}
