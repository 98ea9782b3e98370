//! Trains on a planted two-community stream and classifies the result after
//! every epoch.
//!
//! Usage: `cargo run --release -p mnci --example planted [seed]`

use mnci::{kfold_classify, synth_planted_graph, TrainConfig, Trainer};

fn main() -> Result<(), mnci::Error> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let planted = synth_planted_graph(100, 2, 0.9, 20, seed)?;
    let config = TrainConfig {
        dim: 16,
        communities: 2,
        negatives: 5,
        epochs: 10,
        seed,
        ..TrainConfig::default()
    };
    let mut trainer = Trainer::new(&planted.graph, config.clone())?;
    for _ in 0..config.epochs {
        let stats = trainer.run_epoch(true)?;
        let report = kfold_classify(&trainer.embeddings(), &planted.labels, 5, seed)?;
        println!(
            "epoch {:2} loss {:.6} accuracy {:.3} ({:.2}s)",
            stats.epoch, stats.mean_loss, report.accuracy, stats.seconds
        );
    }
    Ok(())
}
