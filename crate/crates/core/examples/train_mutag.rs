//! Trains the encoder on MUTAG with the default objective, prints the
//! per-epoch losses and evaluates the frozen embeddings with the linear probe.
//!
//! cargo run --release --example train_mutag [epochs] [seed]

use isogcl::pipeline::{embed_dataset, linear_probe_cv, train_with, ProbeConfig, TrainConfig};
use isogcl::tudataset::load_tudataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let epochs = args.next().map(|s| s.parse()).transpose()?.unwrap_or(50);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let data = load_tudataset(concat!(env!("CARGO_MANIFEST_DIR"), "/data/MUTAG"))?;
    let cfg = TrainConfig { epochs, seed, ..TrainConfig::default() };

    println!("epoch      l_c     l_iso  l_subiso     total   seconds");
    let out = train_with(&data, &cfg, |m| {
        println!("{:>5} {:>8.4} {:>9.5} {:>9.6} {:>9.4} {:>9.2}", m.epoch, m.l_c, m.l_iso, m.l_subiso, m.total, m.seconds);
    })?;
    let first = out.metrics.first().unwrap();
    let last = out.metrics.last().unwrap();
    println!(
        "l_iso ratio {:.3}, l_subiso ratio {:.3} ({} optimizer steps)",
        last.l_iso / first.l_iso,
        last.l_subiso / first.l_subiso,
        out.steps
    );

    let embeddings = embed_dataset(&out.model, &data.graphs)?;
    let probe = linear_probe_cv(&embeddings, &data.labels(), &ProbeConfig::default(), seed)?;
    println!("probe accuracy {:.4} +- {:.4} over {} folds", probe.mean, probe.std, probe.folds.len());
    Ok(())
}
