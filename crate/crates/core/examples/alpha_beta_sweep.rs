//! Probe accuracy over a grid of expertise coefficients.
//!
//! cargo run --release --example alpha_beta_sweep [epochs]
//!
//! The default grid is 3 x 3 to keep the run short; the `sweep` command of
//! the binary runs the full configured grid.

use isogcl::pipeline::{sweep, ProbeConfig, SweepGrid, TrainConfig};
use isogcl::tudataset::load_tudataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let epochs = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(20);
    let data = load_tudataset(concat!(env!("CARGO_MANIFEST_DIR"), "/data/MUTAG"))?;
    let grid = SweepGrid { alpha: vec![1.0, 10.0, 100.0], beta: vec![10.0, 1000.0, 10000.0] };
    let base = TrainConfig { epochs, ..TrainConfig::default() };
    let probe = ProbeConfig { repeats: 2, ..ProbeConfig::default() };
    let result = sweep(&data, &base, &probe, &grid)?;
    print!("{:>10}", "alpha\\beta");
    for b in &result.beta {
        print!(" {b:>9}");
    }
    println!();
    for (ai, a) in result.alpha.iter().enumerate() {
        print!("{a:>10}");
        for bi in 0..result.beta.len() {
            match &result.get(ai, bi).result {
                Some(r) => print!(" {:>9.4}", r.mean),
                None => print!(" {:>9}", "failed"),
            }
        }
        println!();
    }
    Ok(())
}
