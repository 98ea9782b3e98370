//! Neighborhood and community influence embeddings, plus the community model
//! with its hard assignments and mass-conserving updates.

use std::collections::HashMap;

use rand::Rng;

use crate::encoders::{PositionalEncoder, TimeEncoder};
use crate::error::{Error, Result};
use crate::ingest::NeighborHistory;
use crate::math::{all_finite, axpy, normalized_affinity};

/// Per-node streaming state.
///
/// `delta_ne` and `delta_co` are learnable and survive [`reset`](Self::reset);
/// everything else is rebuilt from the positional encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub embedding: Vec<f64>,
    pub last_update: f64,
    pub history: NeighborHistory,
    pub delta_ne: f64,
    pub delta_co: f64,
}

impl NodeState {
    pub fn new(embedding: Vec<f64>, history_cap: usize) -> Self {
        Self {
            embedding,
            last_update: 0.0,
            history: NeighborHistory::new(history_cap),
            delta_ne: 1.0,
            delta_co: 1.0,
        }
    }

    /// Restores the initial embedding and clears the history, keeping the
    /// learned scalars.
    pub fn reset(&mut self, embedding: Vec<f64>) {
        self.embedding = embedding;
        self.last_update = 0.0;
        self.history.clear();
    }
}

/// `σ(-‖z_u - z_i‖²)` normalized over the candidates.
pub fn affinity_weights(z_u: &[f64], neighbors: &[&[f64]]) -> Result<Vec<f64>> {
    if neighbors.is_empty() {
        return Err(Error::Contract("affinity weights need at least one neighbor".into()));
    }
    for n in neighbors {
        if n.len() != z_u.len() {
            return Err(Error::dim("neighbor embedding", z_u.len(), n.len()));
        }
    }
    Ok(normalized_affinity(z_u, neighbors.iter().copied()).0)
}

/// One node's neighborhood influence together with what its backward pass
/// needs.
#[derive(Debug, Clone)]
pub struct NeighborhoodInfluence {
    /// `δ^NE · Σ_i a_i F(Δt_i) ⊙ z_i`
    pub value: Vec<f64>,
    /// The sum without the `δ^NE` factor.
    pub unscaled: Vec<f64>,
    pub weights: Vec<f64>,
    /// `(neighbor position, scaled Δt)` per history entry.
    pub terms: Vec<(usize, f64)>,
}

/// Neighborhood influence of `u`'s history at `event_time`.
///
/// `nodes` is indexed by arrival position and supplies the neighbors' latest
/// embeddings. Elapsed times are divided by `time_scale` before encoding.
pub fn neighborhood_influence(
    u: &NodeState,
    nodes: &[NodeState],
    event_time: f64,
    time_scale: f64,
    enc: &TimeEncoder,
) -> Result<NeighborhoodInfluence> {
    let d = u.embedding.len();
    if u.history.is_empty() {
        return Err(Error::Contract("neighborhood influence of an empty history".into()));
    }
    if enc.dim() != d {
        return Err(Error::dim("time encoder", d, enc.dim()));
    }
    let mut neighbors = Vec::with_capacity(u.history.len());
    let mut terms = Vec::with_capacity(u.history.len());
    for (pos, t) in u.history.iter() {
        if t > event_time {
            return Err(Error::Contract(format!(
                "history entry at {t} lies after event time {event_time}"
            )));
        }
        let z = nodes
            .get(pos)
            .ok_or_else(|| Error::Contract(format!("no state for neighbor {pos}")))?;
        neighbors.push(z.embedding.as_slice());
        terms.push((pos, (event_time - t) / time_scale));
    }
    let weights = affinity_weights(&u.embedding, &neighbors)?;

    let mut unscaled = vec![0.0; d];
    for ((&a, z), &(_, dt)) in weights.iter().zip(&neighbors).zip(&terms) {
        let f = enc.encode(dt)?;
        for ((acc, fj), zj) in unscaled.iter_mut().zip(&f).zip(z.iter()) {
            *acc += a * fj * zj;
        }
    }
    let value = unscaled.iter().map(|s| u.delta_ne * s).collect();
    Ok(NeighborhoodInfluence {
        value,
        unscaled,
        weights,
        terms,
    })
}

impl NeighborhoodInfluence {
    /// Backpropagates `upstream = ∂L/∂value`.
    ///
    /// Returns `∂L/∂δ^NE` and adds the frequency gradient into `grad_omega`.
    /// Stored embeddings and affinity weights are constants here.
    pub fn backward(
        &self,
        delta_ne: f64,
        nodes: &[NodeState],
        enc: &TimeEncoder,
        upstream: &[f64],
        grad_omega: &mut [f64],
    ) -> Result<f64> {
        if upstream.len() != self.value.len() {
            return Err(Error::dim("neighborhood upstream", self.value.len(), upstream.len()));
        }
        let grad_delta = crate::math::dot(upstream, &self.unscaled);
        let mut up_f = vec![0.0; upstream.len()];
        for (&a, &(pos, dt)) in self.weights.iter().zip(&self.terms) {
            let z = &nodes[pos].embedding;
            for ((uf, g), zj) in up_f.iter_mut().zip(upstream).zip(z) {
                *uf = delta_ne * a * g * zj;
            }
            enc.accumulate_backward(dt, &up_f, grad_omega)?;
        }
        Ok(grad_delta)
    }
}

/// K community embeddings and the current hard membership of each node.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityModel {
    embeddings: Vec<Vec<f64>>,
    assignment: HashMap<usize, usize>,
}

impl CommunityModel {
    pub fn new(embeddings: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = embeddings.first() else {
            return Err(Error::Config("need at least one community".into()));
        };
        let d = first.len();
        for e in &embeddings {
            if e.len() != d {
                return Err(Error::dim("community embedding", d, e.len()));
            }
            if !all_finite(e) {
                return Err(Error::NonFinite("community embedding".into()));
            }
        }
        Ok(Self {
            embeddings,
            assignment: HashMap::new(),
        })
    }

    /// Seeds `k` communities with the positional encodings of `k` distinct
    /// nodes drawn uniformly from the first `min(node_count, 10k)` arrivals.
    pub fn from_arrivals<R: Rng + ?Sized>(
        encoder: &PositionalEncoder,
        node_count: usize,
        k: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("communities must be at least 1".into()));
        }
        let pool = node_count.min(10 * k);
        if pool < k {
            return Err(Error::Config(format!(
                "cannot seed {k} communities from {node_count} nodes"
            )));
        }
        let picks = rand::seq::index::sample(rng, pool, k);
        Self::new(picks.iter().map(|p| encoder.encode(p)).collect())
    }

    pub fn k(&self) -> usize {
        self.embeddings.len()
    }

    pub fn dim(&self) -> usize {
        self.embeddings[0].len()
    }

    pub fn embeddings(&self) -> &[Vec<f64>] {
        &self.embeddings
    }

    pub fn assignment(&self, node: usize) -> Option<usize> {
        self.assignment.get(&node).copied()
    }

    pub fn assignments(&self) -> &HashMap<usize, usize> {
        &self.assignment
    }

    fn check(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::dim("node embedding vs communities", self.dim(), z.len()));
        }
        Ok(())
    }

    /// Normalized affinity of `z` to every community.
    pub fn weights(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check(z)?;
        Ok(normalized_affinity(z, self.embeddings.iter().map(Vec::as_slice)).0)
    }

    /// `Σ_k a_k z_{c_k}` with the weights it used.
    pub fn mix(&self, z: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let weights = self.weights(z)?;
        let mut out = vec![0.0; self.dim()];
        for (a, c) in weights.iter().zip(&self.embeddings) {
            axpy(*a, c, &mut out);
        }
        Ok((out, weights))
    }

    /// Moves node `u` into its highest-affinity community (judged on
    /// `z_new`, ties to the lowest index) and shifts that community's
    /// embedding by `z_new - z_old`. Returns the chosen index.
    pub fn update(&mut self, u: usize, z_old: &[f64], z_new: &[f64]) -> Result<usize> {
        self.check(z_old)?;
        let weights = self.weights(z_new)?;
        let best = argmax(&weights);
        for ((c, new), old) in self.embeddings[best].iter_mut().zip(z_new).zip(z_old) {
            *c += new - old;
        }
        self.assignment.insert(u, best);
        Ok(best)
    }
}

/// First index of the maximum.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub fn community_weights(z_u: &[f64], com: &CommunityModel) -> Result<Vec<f64>> {
    com.weights(z_u)
}

/// `δ^CO · Σ_k a_k z_{c_k}`
pub fn community_influence(u: &NodeState, com: &CommunityModel) -> Result<Vec<f64>> {
    let (mix, _) = com.mix(&u.embedding)?;
    Ok(mix.into_iter().map(|x| u.delta_co * x).collect())
}

pub fn community_update(
    com: &mut CommunityModel,
    u: usize,
    z_old: &[f64],
    z_new: &[f64],
) -> Result<usize> {
    com.update(u, z_old, z_new)
}
