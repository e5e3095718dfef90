//! Loads a TU-format dataset directory and prints a short summary.
//!
//! cargo run --example ingest_mutag [dataset_dir]

use isogcl::tudataset::load_tudataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/MUTAG").into());
    let data = load_tudataset(&dir)?;
    let violations = data.validate();
    println!("{}: {} graphs, {} violations", data.name, data.graphs.len(), violations.len());
    println!("classes {:?} (raw values), node label vocabulary {}", data.class_map, data.label_vocab_size);

    let sizes: Vec<usize> = data.graphs.iter().map(|g| g.num_nodes()).collect();
    let edges: usize = data.graphs.iter().map(|g| g.num_edges()).sum();
    println!(
        "nodes per graph: min {} mean {:.2} max {}; {} undirected edges",
        sizes.iter().min().unwrap(),
        data.mean_nodes(),
        sizes.iter().max().unwrap(),
        edges
    );
    let mut per_class = vec![0; data.class_count];
    for y in data.labels() {
        per_class[y] += 1;
    }
    println!("graphs per class: {per_class:?}");
    Ok(())
}
