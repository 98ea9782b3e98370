//! `mnci`: train, evaluate, synthesize and export temporal node embeddings.
//!
//! Exit status: 0 success, 1 usage error, 2 data error, 3 non-finite values.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "mnci", version, about = "Inductive temporal network embeddings", arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train on an edge list and write checkpoint, embeddings, metrics and manifest.
    #[command(arg_required_else_help = true)]
    Train(TrainArgs),
    /// Cross-validate a logistic-regression classifier on embeddings.
    #[command(arg_required_else_help = true)]
    Eval(EvalArgs),
    /// Generate a planted-community event stream with labels.
    Synth(SynthArgs),
    /// Embed an edge list with a trained checkpoint, without updating it.
    #[command(arg_required_else_help = true)]
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Edge list: `src dst time` per line.
    #[arg(long, required_unless_present = "manifest")]
    pub edges: Option<PathBuf>,
    /// Repeat the run recorded in a manifest (its config and edge list).
    #[arg(long, conflicts_with_all = ["edges", "dim", "lr", "batch", "negatives", "communities", "epochs", "history_cap", "seed", "time_scale"])]
    pub manifest: Option<PathBuf>,
    /// Embedding dimension (even).
    #[arg(long, default_value_t = 128, value_parser = parse_dim)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.001, value_parser = parse_positive)]
    pub lr: f64,
    /// Events per Adam step.
    #[arg(long, default_value_t = 128, value_parser = parse_count)]
    pub batch: usize,
    /// Negative samples per event.
    #[arg(long, default_value_t = 10, value_parser = parse_count)]
    pub negatives: usize,
    #[arg(long, default_value_t = 10, value_parser = parse_count)]
    pub communities: usize,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    /// Most recent neighbors kept per node.
    #[arg(long, default_value_t = 10, value_parser = parse_count)]
    pub history_cap: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Divisor for elapsed times; defaults to the median positive gap between events.
    #[arg(long, value_parser = parse_positive)]
    pub time_scale: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "mnci-run")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Labels: `node_id label` per line.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value_t = 5, value_parser = parse_folds)]
    pub folds: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Report file; defaults to `eval_report.txt` beside the embeddings.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 100, value_parser = parse_count)]
    pub nodes_per_community: usize,
    #[arg(long, default_value_t = 2, value_parser = parse_count)]
    pub communities: usize,
    /// Probability that an event stays inside its community, in (0.5, 1].
    #[arg(long, default_value_t = 0.9)]
    pub intra_p: f64,
    #[arg(long, default_value_t = 20, value_parser = parse_count)]
    pub events_per_node: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output directory for `edges.txt` and `labels.txt`.
    #[arg(long, default_value = "mnci-synth")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub edges: PathBuf,
    /// Embeddings file to write.
    #[arg(long, default_value = "embeddings.txt")]
    pub out: PathBuf,
}

fn parse_dim(s: &str) -> Result<usize, String> {
    let d: usize = s.parse().map_err(|e| format!("{e}"))?;
    if d == 0 || !d.is_multiple_of(2) {
        return Err(format!("dim must be even and positive, got {d}"));
    }
    Ok(d)
}

fn parse_count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_folds(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(k) if k >= 2 => Ok(k),
        Ok(k) => Err(format!("need at least 2 folds, got {k}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(format!("must be positive and finite, got {x}"));
    }
    Ok(x)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.command {
        Command::Train(a) => commands::train(a),
        Command::Eval(a) => commands::eval(a),
        Command::Synth(a) => commands::synth(a),
        Command::Export(a) => commands::export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
