//! The four stochastic view generators applied to one MUTAG molecule.
//!
//! cargo run --example augmentations [seed]

use isogcl::augment::{AugmentKind, AugmentSpec};
use isogcl::tudataset::load_tudataset;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let data = load_tudataset(concat!(env!("CARGO_MANIFEST_DIR"), "/data/MUTAG"))?;
    let g = &data.graphs[0];
    let fill = data.feature_mean();
    println!("original: {} nodes, {} edges", g.num_nodes(), g.num_edges());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for kind in [AugmentKind::NodeDrop, AugmentKind::EdgePerturb, AugmentKind::AttrMask, AugmentKind::Subgraph] {
        let view = AugmentSpec::new(kind, 0.2).apply(g, &fill, &mut rng)?;
        let masked = match (g.node_features(), view.node_features()) {
            (Some(a), Some(b)) if a.len() == b.len() => a.iter().zip(b).filter(|(x, y)| x != y).count(),
            _ => 0,
        };
        println!(
            "{kind:?}: {} nodes, {} edges, {} masked rows",
            view.num_nodes(),
            view.num_edges(),
            masked
        );
    }
    Ok(())
}
