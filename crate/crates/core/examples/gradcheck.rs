//! Finite-difference check of every parameter gradient of the full objective
//! on a two-graph MUTAG micro-batch.
//!
//! cargo run --release --example gradcheck [dataset_dir]

use isogcl::pipeline::{gradcheck, GradcheckOptions, TrainConfig};
use isogcl::tudataset::load_tudataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/MUTAG").into());
    let data = load_tudataset(&dir)?;
    let report = gradcheck(&data, &TrainConfig::default(), &GradcheckOptions::default())?;
    let mut params = report.params.clone();
    params.sort_by(|a, b| b.max_rel_err.total_cmp(&a.max_rel_err));
    for p in params.iter().take(5) {
        println!("{:<24} {:>6} scalars  max rel {:.3e}  max abs {:.3e}", p.name, p.scalars, p.max_rel_err, p.max_abs_err);
    }
    println!(
        "checked {} scalars ({} one-sided) in {:.2}s, loss {:.4}, max rel err {:.3e} at {}[{}] -> {}",
        report.scalars,
        report.one_sided,
        report.seconds,
        report.loss,
        report.max_rel_err,
        report.worst.0,
        report.worst.1,
        if report.passed { "PASS" } else { "FAIL" }
    );
    Ok(())
}
