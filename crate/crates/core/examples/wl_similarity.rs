//! Graph-tier expertise: Jaccard similarity of Weisfeiler-Lehman label sets.
//!
//! cargo run --example wl_similarity

use isogcl::expert::{iso_similarity, wl_refine, LabelSetPolicy, WlConfig};
use isogcl::graph::Graph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let triangle = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
    let path = Graph::from_edges(3, &[(0, 1), (1, 2)]);
    let hexagon = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]);
    let two_triangles = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);

    let wl = WlConfig::new(3);
    println!("triangle vs path:          {:.4}", iso_similarity(&triangle, &path, &wl)?.value());
    println!("triangle vs itself:        {:.4}", iso_similarity(&triangle, &triangle, &wl)?.value());
    let all = wl.with_policy(LabelSetPolicy::AllIterations);
    println!("triangle vs path (all k):  {:.4}", iso_similarity(&triangle, &path, &all)?.value());

    // Every node of both graphs has degree 2, so refinement never separates them.
    println!("6-cycle vs two triangles:  {:.4}", iso_similarity(&hexagon, &two_triangles, &wl)?.value());
    let traces = wl_refine(&[&hexagon, &two_triangles], &wl)?;
    for (name, trace) in ["6-cycle", "two triangles"].iter().zip(&traces) {
        println!("{name:>14}: rounds {:?}", trace.rounds);
    }
    Ok(())
}
