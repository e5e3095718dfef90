//! Tracks how well the two expertise heads match the experts when they are
//! trained (default coefficients) and when they are only monitored
//! (alpha = beta = 0).
//!
//! cargo run --release --example monitor_expertise [epochs]

use isogcl::pipeline::{train, TrainConfig};
use isogcl::tudataset::load_tudataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let epochs = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(50);
    let data = load_tudataset(concat!(env!("CARGO_MANIFEST_DIR"), "/data/MUTAG"))?;
    let distilled = train(&data, &TrainConfig { epochs, ..TrainConfig::default() })?;
    let monitored = train(&data, &TrainConfig { epochs, alpha: 0.0, beta: 0.0, ..TrainConfig::default() })?;
    println!("epoch   l_iso(distilled) l_iso(monitor)  l_subiso(distilled) l_subiso(monitor)");
    for (a, b) in distilled.metrics.iter().zip(&monitored.metrics) {
        if a.epoch == 1 || a.epoch % 5 == 0 {
            println!("{:>5} {:>18.5} {:>14.5} {:>20.6} {:>17.6}", a.epoch, a.l_iso, b.l_iso, a.l_subiso, b.l_subiso);
        }
    }
    Ok(())
}
