//! Fixtures shared by the benchmarks.

use mnci::{synth_planted_graph, TemporalGraph, TrainConfig};

pub fn planted(nodes_per_community: usize, events_per_node: usize) -> TemporalGraph {
    synth_planted_graph(nodes_per_community, 2, 0.9, events_per_node, 7)
        .expect("valid planted graph")
        .graph
}

pub fn small_config(dim: usize) -> TrainConfig {
    TrainConfig {
        dim,
        communities: 2,
        negatives: 5,
        epochs: 1,
        ..TrainConfig::default()
    }
}
