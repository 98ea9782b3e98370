use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::{Event, NodeId, TemporalGraph};

/// A planted-community event stream with its ground-truth labels.
#[derive(Debug, Clone)]
pub struct PlantedGraph {
    pub graph: TemporalGraph,
    pub labels: BTreeMap<NodeId, i64>,
}

impl PlantedGraph {
    pub fn labels_text(&self) -> String {
        let mut out = String::new();
        for (id, label) in &self.labels {
            let _ = writeln!(out, "{id} {label}");
        }
        out
    }

    pub fn community_of(&self, id: NodeId) -> i64 {
        self.labels[&id]
    }
}

/// `m` communities of `n` nodes each (ids `0..n·m`, community `id / n`).
///
/// Every node emits `e` events at uniform times in `[0, 1)`. The partner is
/// drawn from the node's own community with probability `p` and uniformly
/// from the other communities otherwise.
pub fn synth_planted_graph(n: usize, m: usize, p: f64, e: usize, seed: u64) -> Result<PlantedGraph> {
    if n < 2 || m == 0 || e == 0 {
        return Err(Error::Config(format!(
            "planted graph needs at least 2 nodes per community, 1 community and 1 event per node (got n={n}, m={m}, e={e})"
        )));
    }
    if !(p > 0.5 && p <= 1.0) {
        return Err(Error::Config(format!("intra-community probability must lie in (0.5, 1], got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n * m;
    let mut events = Vec::with_capacity(total * e);
    for u in 0..total {
        let (community, local) = (u / n, u % n);
        for _ in 0..e {
            let time: f64 = rng.random();
            let intra = m == 1 || rng.random::<f64>() < p;
            let v = if intra {
                let r = rng.random_range(0..n - 1);
                community * n + if r >= local { r + 1 } else { r }
            } else {
                let r = rng.random_range(0..m - 1);
                let other = if r >= community { r + 1 } else { r };
                other * n + rng.random_range(0..n)
            };
            events.push(Event {
                src: u as NodeId,
                dst: v as NodeId,
                time,
            });
        }
    }
    let graph = TemporalGraph::from_events(events)?;
    let labels = (0..total).map(|u| (u as NodeId, (u / n) as i64)).collect();
    Ok(PlantedGraph { graph, labels })
}
