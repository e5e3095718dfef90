//! Command-line front end.
//!
//! Every command reads an optional `--config` file (see
//! [`crate::pipeline::RunConfigFile`]), applies the flags on top of it, and,
//! when an output directory is known, writes the resolved configuration
//! there as `config.toml` so the run can be repeated from that copy alone.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::autodiff::Checkpoint;
use crate::expert::{iso_similarity, structural_matrix, WlConfig};
use crate::gnn::Model;
use crate::graph::DatasetBundle;
use crate::pipeline::{
    embed_dataset, gradcheck, linear_probe_cv, sweep, train_with, wl_config, write_metrics, GradcheckOptions,
    PipelineError, RunConfigFile,
};
use crate::tudataset::load_tudataset;

#[derive(Debug, Parser)]
#[command(name = "isogcl", version, about = "Graph contrastive learning with topology-isomorphism expertise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and validate a TU-format dataset directory.
    Ingest(CommonArgs),
    /// Write graph-tier similarities or subgraph-tier coefficients.
    Expertise(ExpertiseArgs),
    /// Train the encoder and write a checkpoint and metrics stream.
    Train(CommonArgs),
    /// Evaluate a checkpoint with the cross-validated linear probe.
    Probe(ProbeArgs),
    /// Train and probe every (alpha, beta) cell of the configured grid.
    Sweep(CommonArgs),
    /// Compare analytic and finite-difference gradients of the full loss.
    Gradcheck(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub repeats: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExpertiseMode {
    Iso,
    Subiso,
}

#[derive(Debug, Clone, Args)]
pub struct ExpertiseArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub mode: ExpertiseMode,
    #[arg(long)]
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub checkpoint: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Pipeline(PipelineError::Config(_)) => 2,
            _ => 1,
        }
    }
}

fn resolve(args: &CommonArgs) -> Result<RunConfigFile, CliError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfigFile::load(path)?,
        None => RunConfigFile::default(),
    };
    if let Some(d) = &args.dataset {
        cfg.dataset = Some(d.clone());
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    if let Some(s) = args.seed {
        cfg.train.seed = s;
    }
    if let Some(l) = args.lambda {
        cfg.train.lambda = l;
        cfg.expertise.lambda = l;
    }
    if let Some(f) = args.folds {
        cfg.probe.folds = f;
    }
    if let Some(r) = args.repeats {
        cfg.probe.repeats = r;
    }
    cfg.train.validate()?;
    Ok(cfg)
}

fn dataset(cfg: &RunConfigFile) -> Result<DatasetBundle, CliError> {
    let dir = cfg.dataset.as_ref().ok_or_else(|| CliError::Usage("no dataset given (--dataset or `dataset` key)".into()))?;
    Ok(load_tudataset(dir).map_err(PipelineError::from)?)
}

fn out_dir(cfg: &RunConfigFile) -> Result<Option<PathBuf>, CliError> {
    let Some(dir) = &cfg.out else { return Ok(None) };
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    fs::write(dir.join("config.toml"), cfg.to_toml()).map_err(|e| io_error(dir, e))?;
    Ok(Some(dir.clone()))
}

fn require_out(cfg: &RunConfigFile, command: &str) -> Result<PathBuf, CliError> {
    out_dir(cfg)?.ok_or_else(|| CliError::Usage(format!("{command} needs an output directory (--out or `out` key)")))
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Failed(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Writes data to stdout; a closed pipe ends output quietly.
fn emit(text: &str) -> Result<(), CliError> {
    use std::io::Write as _;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Failed(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn snake<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_value(value).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

/// Runs one command. Data goes to stdout or files; the caller prints errors.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(args) => ingest(&args),
        Command::Expertise(args) => expertise(&args),
        Command::Train(args) => train_cmd(&args),
        Command::Probe(args) => probe_cmd(&args),
        Command::Sweep(args) => sweep_cmd(&args),
        Command::Gradcheck(args) => gradcheck_cmd(&args),
    }
}

fn ingest(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = resolve(args)?;
    let data = dataset(&cfg)?;
    out_dir(&cfg)?;
    let violations = data.validate();
    let count: usize = violations.iter().map(|(_, r)| r.violations.len()).sum();
    println!("{}: {} graphs, {} violations", data.name, data.graphs.len(), count);
    println!(
        "classes {}, node label vocabulary {}, mean nodes {:.2}",
        data.class_count,
        data.label_vocab_size,
        data.mean_nodes()
    );
    for (i, report) in &violations {
        eprintln!("graph {i}: {report:?}");
    }
    if count > 0 {
        return Err(CliError::Failed(format!("{count} violations")));
    }
    Ok(())
}

fn expertise(args: &ExpertiseArgs) -> Result<(), CliError> {
    let mut cfg = resolve(&args.common)?;
    if let Some(k) = args.iterations {
        cfg.expertise.iterations = k;
    }
    let data = dataset(&cfg)?;
    let out = out_dir(&cfg)?;
    let mut text = String::new();
    match args.mode {
        ExpertiseMode::Iso => {
            let base = wl_config(&cfg.train, &data);
            let wl = WlConfig::new(cfg.expertise.iterations).with_policy(base.policy).with_initial(base.initial);
            let n = data.graphs.len();
            let pairs = if cfg.expertise.pairs.is_empty() {
                (0..n).flat_map(|i| [(i, i), (i, (i + 1) % n)]).collect()
            } else {
                cfg.expertise.pairs.clone()
            };
            if let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| i >= n || j >= n) {
                return Err(CliError::Usage(format!("pair ({i}, {j}) is out of range for {n} graphs")));
            }
            writeln!(text, "# mode iso iterations {} policy {} initial {}", wl.iterations, snake(&wl.policy), snake(&wl.initial)).unwrap();
            for (i, j) in pairs {
                let y = iso_similarity(&data.graphs[i], &data.graphs[j], &wl).map_err(PipelineError::from)?;
                writeln!(text, "{i} {j} {:?}", y.value()).unwrap();
            }
        }
        ExpertiseMode::Subiso => {
            let lambda = cfg.expertise.lambda;
            writeln!(text, "# mode subiso lambda {lambda:?}").unwrap();
            writeln!(text, "# graph v u w").unwrap();
            for (gi, g) in data.graphs.iter().enumerate() {
                let s = structural_matrix(g, lambda).map_err(PipelineError::from)?;
                for (v, u, w) in s.triples() {
                    writeln!(text, "{gi} {v} {u} {w:?}").unwrap();
                }
            }
        }
    }
    match out {
        Some(dir) => {
            let name = match args.mode {
                ExpertiseMode::Iso => "expertise_iso.txt",
                ExpertiseMode::Subiso => "expertise_subiso.txt",
            };
            write_file(&dir.join(name), &text)
        }
        None => emit(&text),
    }
}

fn train_cmd(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = resolve(args)?;
    let data = dataset(&cfg)?;
    let dir = require_out(&cfg, "train")?;
    let out = train_with(&data, &cfg.train, |m| {
        log::info!("epoch {} l_c {:.4} l_iso {:.5} l_subiso {:.6} total {:.4}", m.epoch, m.l_c, m.l_iso, m.l_subiso, m.total);
    })?;
    write_metrics(dir.join("metrics.jsonl"), &out.metrics)?;
    write_file(&dir.join("checkpoint.txt"), &out.model.checkpoint().to_text())?;
    let last = out.metrics.last().expect("at least one epoch");
    println!(
        "trained {} epochs ({} steps): l_c {:.4} l_iso {:.5} l_subiso {:.6} total {:.4}",
        out.metrics.len(),
        out.steps,
        last.l_c,
        last.l_iso,
        last.l_subiso,
        last.total
    );
    Ok(())
}

fn probe_cmd(args: &ProbeArgs) -> Result<(), CliError> {
    let cfg = resolve(&args.common)?;
    let data = dataset(&cfg)?;
    let out = out_dir(&cfg)?;
    let text = fs::read_to_string(&args.checkpoint).map_err(|e| io_error(&args.checkpoint, e))?;
    let ckpt = Checkpoint::parse(&text).map_err(PipelineError::from)?;
    let model = Model::from_checkpoint(&ckpt).map_err(PipelineError::from)?;
    let embeddings = embed_dataset(&model, &data.graphs)?;
    let result = linear_probe_cv(&embeddings, &data.labels(), &cfg.probe, cfg.train.seed)?;
    println!("accuracy {:.4} +- {:.4} over {} folds", result.mean, result.std, result.folds.len());
    if let Some(dir) = out {
        write_file(&dir.join("probe.json"), &json(&result))?;
    }
    Ok(())
}

fn sweep_cmd(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = resolve(args)?;
    let data = dataset(&cfg)?;
    let dir = require_out(&cfg, "sweep")?;
    let result = sweep(&data, &cfg.train, &cfg.probe, &cfg.sweep)?;
    write_file(&dir.join("sweep.json"), &json(&result))?;
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
    let failed = result.cells.iter().filter(|c| c.error.is_some()).count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} sweep cells failed", result.cells.len())));
    }
    Ok(())
}

fn gradcheck_cmd(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = resolve(args)?;
    let data = dataset(&cfg)?;
    let out = out_dir(&cfg)?;
    let report = gradcheck(&data, &cfg.train, &GradcheckOptions::default())?;
    println!(
        "{}: max relative error {:.3e} (tolerance {:.0e}) over {} scalars, worst {}[{}], {:.2}s",
        if report.passed { "pass" } else { "fail" },
        report.max_rel_err,
        report.tolerance,
        report.scalars,
        report.worst.0,
        report.worst.1,
        report.seconds
    );
    if let Some(dir) = out {
        write_file(&dir.join("gradcheck.json"), &json(&report))?;
    }
    if !report.passed {
        return Err(CliError::Failed(format!("gradient check failed: {:.3e}", report.max_rel_err)));
    }
    Ok(())
}
