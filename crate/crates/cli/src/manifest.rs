//! The record written next to every training run.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use mnci::TrainConfig;
use serde::{Deserialize, Serialize};

/// Everything needed to repeat a run: the fully resolved configuration, the
/// inputs, the outputs and when it ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: TrainConfig,
    pub seed: u64,
    pub edges: PathBuf,
    pub event_count: usize,
    pub node_count: usize,
    pub epochs_completed: usize,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
    pub outputs: Outputs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub checkpoint: PathBuf,
    pub embeddings: PathBuf,
    pub metrics: PathBuf,
    pub manifest: PathBuf,
}

impl Outputs {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            checkpoint: dir.join("checkpoint.txt"),
            embeddings: dir.join("embeddings.txt"),
            metrics: dir.join("metrics.log"),
            manifest: dir.join("manifest.json"),
        }
    }
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest fields serialize");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}
