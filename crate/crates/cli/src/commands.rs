//! The four subcommands.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use mnci::eval::export_embeddings;
use mnci::ingest::{read_edge_list, read_labels};
use mnci::{kfold_classify, synth_planted_graph, Checkpoint, Embeddings, TrainConfig, Trainer};

use crate::manifest::{unix_now, Outputs, RunManifest};
use crate::{EvalArgs, ExportArgs, SynthArgs, TrainArgs};

#[derive(Debug)]
pub enum CliError {
    /// A malformed input that is not one of the core formats.
    Data(String),
    Core(mnci::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(mnci::Error::Config(_)) => 1,
            CliError::Core(mnci::Error::NonFinite(_)) => 3,
            CliError::Data(_) | CliError::Core(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Data(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<mnci::Error> for CliError {
    fn from(e: mnci::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| mnci::Error::io(dir, e).into())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| mnci::Error::io(path, e).into())
}

pub fn train(args: TrainArgs) -> Result<()> {
    let started = unix_now();
    let (edges, config) = match &args.manifest {
        Some(path) => {
            let m = RunManifest::load(path).map_err(CliError::Data)?;
            (m.edges, m.config)
        }
        None => (
            args.edges.clone().expect("clap requires --edges without --manifest"),
            TrainConfig {
                dim: args.dim,
                learning_rate: args.lr,
                batch_size: args.batch,
                negatives: args.negatives,
                communities: args.communities,
                epochs: args.epochs,
                history_cap: args.history_cap,
                seed: args.seed,
                time_scale: args.time_scale,
                ..TrainConfig::default()
            },
        ),
    };
    let graph = read_edge_list(&edges)?;
    let outputs = Outputs::in_dir(&args.out);
    create_dir(&args.out)?;

    let epochs = config.epochs;
    let mut trainer = Trainer::new(&graph, config)?;
    let mut metrics = String::new();
    for _ in 0..epochs {
        let s = trainer.run_epoch(true)?;
        eprintln!("epoch {}/{epochs} loss {:.6} ({:.2}s)", s.epoch + 1, s.mean_loss, s.seconds);
        metrics.push_str(&format!("{} {:.17e} {:.6}\n", s.epoch, s.mean_loss, s.seconds));
    }
    trainer.checkpoint().save(&outputs.checkpoint)?;
    export_embeddings(&trainer.embeddings(), &outputs.embeddings)?;
    write(&outputs.metrics, &metrics)?;

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: TrainConfig {
            time_scale: Some(trainer.time_scale()),
            ..trainer.config().clone()
        },
        seed: trainer.config().seed,
        edges,
        event_count: graph.events().len(),
        node_count: graph.node_count(),
        epochs_completed: trainer.epochs_done(),
        started,
        finished: unix_now(),
        outputs: outputs.clone(),
    };
    write(&outputs.manifest, &manifest.to_json())?;
    println!("wrote {}", args.out.display());
    Ok(())
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let embeddings = Embeddings::load(&args.embeddings)?;
    let labels = read_labels(&args.labels)?;
    let report = kfold_classify(&embeddings, &labels, args.folds, args.seed)?;
    let out = args.out.unwrap_or_else(|| sibling(&args.embeddings, "eval_report.txt"));
    write(&out, &report.to_text())?;
    println!("accuracy {}", report.accuracy);
    println!("weighted_f1 {}", report.weighted_f1);
    Ok(())
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    match path.parent() {
        Some(dir) => dir.join(name),
        None => PathBuf::from(name),
    }
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let planted = synth_planted_graph(
        args.nodes_per_community,
        args.communities,
        args.intra_p,
        args.events_per_node,
        args.seed,
    )?;
    create_dir(&args.out)?;
    write(&args.out.join("edges.txt"), &planted.graph.to_edge_list())?;
    write(&args.out.join("labels.txt"), &planted.labels_text())?;
    println!("wrote {}", args.out.display());
    Ok(())
}

pub fn export(args: ExportArgs) -> Result<()> {
    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    let graph = read_edge_list(&args.edges)?;
    let mut trainer = Trainer::from_checkpoint(&graph, &checkpoint)?;
    trainer.run_epoch(false)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    export_embeddings(&trainer.embeddings(), &args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}
