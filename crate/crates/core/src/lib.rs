//! Inductive node embeddings for temporal interaction networks.
//!
//! Nodes start from a sinusoidal encoding of their arrival order. Every
//! interaction refreshes both endpoints through a three-gate recurrent cell
//! that mixes the previous embedding with a neighborhood influence (recent
//! neighbors weighted by affinity and a learnable Fourier time encoding) and
//! a community influence (affinity-weighted community embeddings). Training
//! streams the events in time order and minimizes a negative-sampling
//! objective with Adam.
//!
//! The crate is split along the pipeline:
//!
//! - [`ingest`]: edge-list and label parsing, neighbor histories.
//! - [`encoders`]: positional and time encoders.
//! - [`influence`]: affinity weights, influence embeddings, community model.
//! - [`aggregator`]: the gated cell with its analytic backward pass.
//! - [`trainer`]: objective terms, negative sampling, Adam, the event loop,
//!   checkpoints.
//! - [`eval`]: k-fold logistic-regression node classification, synthetic
//!   planted-community graphs and embedding export.

pub mod aggregator;
pub mod encoders;
mod error;
pub mod eval;
pub mod influence;
pub mod ingest;
pub mod math;
pub mod trainer;

pub use aggregator::{cell_backward, cell_forward, AggregatorParams, CellGrads, CellTape};
pub use encoders::{positional_encode, PositionalEncoder, TimeEncoder};
pub use error::{Error, Result};
pub use eval::{
    kfold_classify, synth_planted_graph, weighted_f1, EvalReport, Embeddings, PlantedGraph,
};
pub use influence::{CommunityModel, NodeState};
pub use ingest::{parse_edge_list, parse_labels, Event, NeighborHistory, NodeId, TemporalGraph};
pub use trainer::{train, Checkpoint, TrainConfig, Trainer, TrainedModel};
