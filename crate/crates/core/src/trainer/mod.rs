//! The per-event training loop.
//!
//! Each event `(u, v, t)` refreshes both endpoints: the partner joins the
//! endpoint's history, the neighborhood and community influences are
//! evaluated against the stored (pre-event) state, and the recurrent cell
//! produces the new embeddings. The event loss is the negated sum of the
//! negative-sampling pair term (anchored at `u`) and both endpoints'
//! community terms. Gradients stop at stored embeddings and community
//! vectors; they reach the cell weights, the time frequencies and the two
//! endpoints' influence scalars. Parameters move once per `batch_size`
//! events, embeddings and communities after every event.

mod adam;
mod checkpoint;
mod config;
pub mod objective;
mod sampler;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use adam::{AdamConfig, Moments, OptimizerState, ScalarMoments};
pub use checkpoint::{Checkpoint, Tensor, TensorValues};
pub use config::TrainConfig;
pub use objective::{community_term, pair_term, CommunityTerm, PairTerm};
pub use sampler::NegativeSampler;

use crate::aggregator::{cell_backward, cell_forward, AggregatorParams, CellGrads, CellTape};
use crate::encoders::{PositionalEncoder, TimeEncoder};
use crate::error::{Error, Result};
use crate::eval::Embeddings;
use crate::influence::{neighborhood_influence, CommunityModel, NeighborhoodInfluence, NodeState};
use crate::ingest::{NodeId, TemporalGraph};
use crate::math::dot;

const STREAM_PARAMS: u64 = 1;
const STREAM_OMEGA: u64 = 2;
const STREAM_COMMUNITIES: u64 = 3;
const STREAM_NEGATIVES: u64 = 1 << 32;

fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some(values[values.len() / 2])
}

/// Median positive gap between consecutive events of the stream.
pub fn median_event_gap(graph: &TemporalGraph) -> Option<f64> {
    let gaps = graph
        .events()
        .windows(2)
        .map(|w| w[1].time - w[0].time)
        .filter(|&g| g > 0.0)
        .collect();
    median(gaps)
}

/// Median positive gap between consecutive interactions of the same node.
pub fn median_node_gap(graph: &TemporalGraph) -> Option<f64> {
    let mut last = vec![None; graph.node_count()];
    let mut gaps = Vec::new();
    for (u, v, t) in graph.indexed_events() {
        for x in [u, v] {
            if let Some(prev) = last[x] {
                if t > prev {
                    gaps.push(t - prev);
                }
            }
            last[x] = Some(t);
        }
    }
    median(gaps)
}

/// Gradients of one event's loss.
#[derive(Debug, Clone)]
pub struct EventGrads {
    pub cell: CellGrads,
    pub omega: Vec<f64>,
    /// `(node, ∂/∂δ^NE, ∂/∂δ^CO)` for source then destination.
    pub delta: [(usize, f64, f64); 2],
}

#[derive(Debug, Clone)]
pub struct EventOutcome {
    /// Negated objective of the event.
    pub loss: f64,
    pub z_src: Vec<f64>,
    pub z_dst: Vec<f64>,
    pub grads: EventGrads,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub seconds: f64,
}

struct Endpoint {
    node: usize,
    ne: NeighborhoodInfluence,
    community_mix: Vec<f64>,
    z_new: Vec<f64>,
    tape: CellTape,
}

#[derive(Debug, Clone)]
struct Accumulator {
    cell: CellGrads,
    omega: Vec<f64>,
    delta_ne: Vec<f64>,
    delta_co: Vec<f64>,
    touched: Vec<bool>,
    events: usize,
}

impl Accumulator {
    fn new(dim: usize, nodes: usize) -> Self {
        Self {
            cell: CellGrads::zeros(dim),
            omega: vec![0.0; dim / 2],
            delta_ne: vec![0.0; nodes],
            delta_co: vec![0.0; nodes],
            touched: vec![false; nodes],
            events: 0,
        }
    }

    fn add(&mut self, g: &EventGrads) {
        for (acc, part) in self.cell.tensors_mut().into_iter().zip(g.cell.tensors()) {
            for (a, p) in acc.iter_mut().zip(part) {
                *a += p;
            }
        }
        for (a, p) in self.omega.iter_mut().zip(&g.omega) {
            *a += p;
        }
        for &(node, ne, co) in &g.delta {
            self.delta_ne[node] += ne;
            self.delta_co[node] += co;
            self.touched[node] = true;
        }
        self.events += 1;
    }

    fn scale(&mut self) {
        let s = 1.0 / self.events as f64;
        for t in self.cell.tensors_mut() {
            t.iter_mut().for_each(|x| *x *= s);
        }
        self.omega.iter_mut().for_each(|x| *x *= s);
        self.delta_ne.iter_mut().for_each(|x| *x *= s);
        self.delta_co.iter_mut().for_each(|x| *x *= s);
    }

    fn clear(&mut self) {
        for t in self.cell.tensors_mut() {
            t.fill(0.0);
        }
        self.omega.fill(0.0);
        self.delta_ne.fill(0.0);
        self.delta_co.fill(0.0);
        self.touched.fill(false);
        self.events = 0;
    }
}

/// Learned parameters plus the final pass's embeddings.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub config: TrainConfig,
    pub params: AggregatorParams,
    pub time_encoder: TimeEncoder,
    pub time_scale: f64,
    pub node_ids: Vec<NodeId>,
    pub delta_ne: Vec<f64>,
    pub delta_co: Vec<f64>,
    pub embeddings: Embeddings,
    pub epochs: Vec<EpochStats>,
}

/// Streaming trainer over one temporal graph.
#[derive(Debug, Clone)]
pub struct Trainer {
    config: TrainConfig,
    node_ids: Vec<NodeId>,
    events: Vec<(usize, usize, f64)>,
    encoder: PositionalEncoder,
    params: AggregatorParams,
    time_encoder: TimeEncoder,
    time_scale: f64,
    nodes: Vec<NodeState>,
    communities: CommunityModel,
    sampler: NegativeSampler,
    optimizer: OptimizerState,
    accum: Accumulator,
    clock: f64,
    epochs_done: usize,
}

impl Trainer {
    pub fn new(graph: &TemporalGraph, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let d = config.dim;
        let encoder = PositionalEncoder::new(d)?;
        let time_scale = match config.time_scale {
            Some(s) => s,
            None => median_event_gap(graph).unwrap_or(1.0),
        };
        let omega_std = median_node_gap(graph).map_or(1.0, |g| time_scale / g);
        let params = AggregatorParams::init(d, &mut seeded(config.seed, STREAM_PARAMS));
        let time_encoder = TimeEncoder::random(d, omega_std, &mut seeded(config.seed, STREAM_OMEGA))?;

        let n = graph.node_count();
        let nodes = (0..n)
            .map(|p| NodeState::new(encoder.encode(p), config.history_cap))
            .collect();
        let communities = Self::seed_communities(&encoder, n, &config)?;
        let sampler = NegativeSampler::from_degrees(&graph.degrees(), config.seed)?;
        let optimizer = OptimizerState::new(
            AdamConfig {
                beta1: config.adam_beta1,
                beta2: config.adam_beta2,
                eps: config.adam_eps,
            },
            &params,
            d / 2,
            n,
        );
        Ok(Self {
            node_ids: graph.nodes().to_vec(),
            events: graph.indexed_events().collect(),
            encoder,
            params,
            time_encoder,
            time_scale,
            nodes,
            communities,
            sampler,
            optimizer,
            accum: Accumulator::new(d, n),
            clock: f64::NEG_INFINITY,
            epochs_done: 0,
            config,
        })
    }

    /// A trainer for `graph` that starts from learned parameters.
    ///
    /// Nodes the model has never seen get unit influence scalars.
    pub fn from_model(graph: &TemporalGraph, model: &TrainedModel) -> Result<Self> {
        let config = TrainConfig {
            time_scale: Some(model.time_scale),
            ..model.config.clone()
        };
        let mut t = Self::new(graph, config)?;
        t.params = model.params.clone();
        t.time_encoder = model.time_encoder.clone();
        for (i, id) in model.node_ids.iter().enumerate() {
            if let Some(p) = graph.position(*id) {
                t.nodes[p].delta_ne = model.delta_ne[i];
                t.nodes[p].delta_co = model.delta_co[i];
            }
        }
        Ok(t)
    }

    fn seed_communities(encoder: &PositionalEncoder, n: usize, config: &TrainConfig) -> Result<CommunityModel> {
        CommunityModel::from_arrivals(
            encoder,
            n,
            config.communities,
            &mut seeded(config.seed, STREAM_COMMUNITIES),
        )
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn params(&self) -> &AggregatorParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut AggregatorParams {
        &mut self.params
    }

    pub fn time_encoder(&self) -> &TimeEncoder {
        &self.time_encoder
    }

    pub fn time_encoder_mut(&mut self) -> &mut TimeEncoder {
        &mut self.time_encoder
    }

    pub fn time_scale(&self) -> f64 {
        self.time_scale
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn nodes_mut(&mut self) -> &mut [NodeState] {
        &mut self.nodes
    }

    pub fn communities(&self) -> &CommunityModel {
        &self.communities
    }

    pub fn optimizer(&self) -> &OptimizerState {
        &self.optimizer
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.node_ids
    }

    pub fn epochs_done(&self) -> usize {
        self.epochs_done
    }

    /// Events as `(src position, dst position, time)`.
    pub fn events(&self) -> &[(usize, usize, f64)] {
        &self.events
    }

    /// Puts every node back at its positional encoding with an empty
    /// history and reseeds the communities. Learned parameters are kept.
    pub fn reset_stream(&mut self) -> Result<()> {
        for (p, node) in self.nodes.iter_mut().enumerate() {
            node.reset(self.encoder.encode(p));
        }
        self.communities = Self::seed_communities(&self.encoder, self.nodes.len(), &self.config)?;
        self.sampler
            .reseed(self.config.seed, STREAM_NEGATIVES + self.epochs_done as u64);
        self.clock = f64::NEG_INFINITY;
        Ok(())
    }

    /// Draws the negatives for an event anchored at `src`.
    pub fn draw_negatives(&mut self, src: usize, dst: usize) -> Result<Vec<usize>> {
        self.sampler.draw(self.config.negatives, &[src, dst])
    }

    /// Loss and gradients of one event against the current state, without
    /// mutating anything.
    pub fn event_objective(&self, src: usize, dst: usize, time: f64, negatives: &[usize]) -> Result<EventOutcome> {
        let mut ends = Vec::with_capacity(2);
        for (x, partner) in [(src, dst), (dst, src)] {
            let mut state = self.nodes[x].clone();
            state.history.push(partner, time)?;
            let ne = neighborhood_influence(&state, &self.nodes, time, self.time_scale, &self.time_encoder)?;
            let (community_mix, _) = self.communities.mix(&state.embedding)?;
            let co: Vec<f64> = community_mix.iter().map(|c| state.delta_co * c).collect();
            let (z_new, tape) = cell_forward(&state.embedding, &ne.value, &co, &self.params)?;
            ends.push(Endpoint {
                node: x,
                ne,
                community_mix,
                z_new,
                tape,
            });
        }

        let negs: Vec<&[f64]> = negatives.iter().map(|&n| self.nodes[n].embedding.as_slice()).collect();
        let pair = pair_term(&ends[0].z_new, &ends[1].z_new, &negs, self.config.negatives)?;
        let com_src = community_term(&ends[0].z_new, &self.communities)?;
        let com_dst = community_term(&ends[1].z_new, &self.communities)?;
        let loss = -(pair.value + com_src.value + com_dst.value);
        if !loss.is_finite() {
            return Err(Error::NonFinite("event loss".into()));
        }

        let upstreams = [
            neg_sum(&pair.grad_u, &com_src.grad_u),
            neg_sum(&pair.grad_v, &com_dst.grad_u),
        ];
        let d = self.config.dim;
        let mut cell = CellGrads::zeros(d);
        let mut omega = vec![0.0; d / 2];
        let mut delta = [(0, 0.0, 0.0); 2];
        for (i, (end, up)) in ends.iter().zip(&upstreams).enumerate() {
            let back = cell_backward(&end.tape, up, &self.params)?;
            for (acc, part) in cell.tensors_mut().into_iter().zip(back.params.tensors()) {
                for (a, p) in acc.iter_mut().zip(part) {
                    *a += p;
                }
            }
            let node = &self.nodes[end.node];
            let g_ne = end
                .ne
                .backward(node.delta_ne, &self.nodes, &self.time_encoder, &back.ne, &mut omega)?;
            let g_co = dot(&back.co, &end.community_mix);
            delta[i] = (end.node, g_ne, g_co);
        }

        let mut ends = ends.into_iter();
        Ok(EventOutcome {
            loss,
            z_src: ends.next().map(|e| e.z_new).unwrap_or_default(),
            z_dst: ends.next().map(|e| e.z_new).unwrap_or_default(),
            grads: EventGrads { cell, omega, delta },
        })
    }

    /// Processes one event in stream order and returns its loss.
    ///
    /// With `learn` set, the gradients join the current minibatch and a full
    /// minibatch triggers an Adam step.
    pub fn process_event(&mut self, src: usize, dst: usize, time: f64, learn: bool) -> Result<f64> {
        if time < self.clock {
            return Err(Error::OutOfOrder {
                last: self.clock,
                time,
            });
        }
        let negatives = self.draw_negatives(src, dst)?;
        let out = self.event_objective(src, dst, time, &negatives)?;
        if learn {
            self.accum.add(&out.grads);
            if self.accum.events == self.config.batch_size {
                self.apply_updates()?;
            }
        }

        for (x, partner, z_new) in [(src, dst, &out.z_src), (dst, src, &out.z_dst)] {
            let node = &mut self.nodes[x];
            node.history.push(partner, time)?;
            let z_old = std::mem::replace(&mut node.embedding, z_new.clone());
            node.last_update = time;
            self.communities.update(x, &z_old, z_new)?;
        }
        self.clock = time;
        Ok(out.loss)
    }

    /// Applies one Adam step with the mean of the accumulated gradients.
    pub fn apply_updates(&mut self) -> Result<()> {
        if self.accum.events == 0 {
            return Ok(());
        }
        self.accum.scale();
        let lr = self.config.learning_rate;
        let opt = &mut self.optimizer;
        let cfg = opt.config;
        for (((moments, param), grad), name) in opt
            .cell
            .iter_mut()
            .zip(self.params.tensors_mut())
            .zip(self.accum.cell.tensors())
            .zip(AggregatorParams::TENSOR_NAMES)
        {
            moments.apply(&cfg, lr, name, param, grad)?;
        }
        opt.omega
            .apply(&cfg, lr, "omega", self.time_encoder.omega_mut(), &self.accum.omega)?;

        let mut delta_ne: Vec<f64> = self.nodes.iter().map(|n| n.delta_ne).collect();
        let mut delta_co: Vec<f64> = self.nodes.iter().map(|n| n.delta_co).collect();
        opt.delta_ne
            .apply(&cfg, lr, "delta_ne", &mut delta_ne, &self.accum.delta_ne, &self.accum.touched)?;
        opt.delta_co
            .apply(&cfg, lr, "delta_co", &mut delta_co, &self.accum.delta_co, &self.accum.touched)?;
        for ((node, ne), co) in self.nodes.iter_mut().zip(delta_ne).zip(delta_co) {
            node.delta_ne = ne;
            node.delta_co = co;
        }
        self.accum.clear();
        Ok(())
    }

    /// One pass over the stream from the initial state.
    ///
    /// A learning pass flushes any partial minibatch at the end and counts
    /// towards [`epochs_done`](Self::epochs_done).
    pub fn run_epoch(&mut self, learn: bool) -> Result<EpochStats> {
        let start = Instant::now();
        self.reset_stream()?;
        let mut total = 0.0;
        for i in 0..self.events.len() {
            let (u, v, t) = self.events[i];
            total += self.process_event(u, v, t, learn)?;
        }
        if learn {
            self.apply_updates()?;
        }
        let stats = EpochStats {
            epoch: self.epochs_done,
            mean_loss: total / self.events.len() as f64,
            seconds: start.elapsed().as_secs_f64(),
        };
        if learn {
            self.epochs_done += 1;
        }
        Ok(stats)
    }

    /// Current node embeddings in arrival order.
    pub fn embeddings(&self) -> Embeddings {
        Embeddings::new(
            self.node_ids.clone(),
            self.nodes.iter().map(|n| n.embedding.clone()).collect(),
        )
        .expect("node states share one dimension")
    }

    pub fn into_model(self, epochs: Vec<EpochStats>) -> TrainedModel {
        TrainedModel {
            embeddings: self.embeddings(),
            delta_ne: self.nodes.iter().map(|n| n.delta_ne).collect(),
            delta_co: self.nodes.iter().map(|n| n.delta_co).collect(),
            config: TrainConfig {
                time_scale: Some(self.time_scale),
                ..self.config
            },
            params: self.params,
            time_encoder: self.time_encoder,
            time_scale: self.time_scale,
            node_ids: self.node_ids,
            epochs,
        }
    }
}

fn neg_sum(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| -(x + y)).collect()
}

/// Trains for `config.epochs` passes and returns the last pass's embeddings.
pub fn train(graph: &TemporalGraph, config: TrainConfig) -> Result<TrainedModel> {
    train_with(graph, config, |_| {})
}

/// [`train`] with a callback after every epoch.
pub fn train_with<F: FnMut(&EpochStats)>(
    graph: &TemporalGraph,
    config: TrainConfig,
    mut on_epoch: F,
) -> Result<TrainedModel> {
    let epochs = config.epochs;
    let mut trainer = Trainer::new(graph, config)?;
    let mut history = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        let stats = trainer.run_epoch(true)?;
        on_epoch(&stats);
        history.push(stats);
    }
    Ok(trainer.into_model(history))
}

/// Embeds `graph` with frozen parameters from `model`: one pass over the
/// stream, no updates.
pub fn infer(graph: &TemporalGraph, model: &TrainedModel) -> Result<Embeddings> {
    let mut trainer = Trainer::from_model(graph, model)?;
    trainer.run_epoch(false)?;
    Ok(trainer.embeddings())
}
