//! The three-gate recurrent cell that turns a node's previous embedding and
//! its two influence embeddings into the new embedding.
//!
//! ```text
//! x  = [z ⊕ ne ⊕ co]
//! UG = σ(W_UG x + b_UG)   NG = σ(W_NG x + b_NG)   CG = σ(W_CG x + b_CG)
//! z̃  = tanh(W_z [z ⊕ NG⊙ne ⊕ CG⊙co] + b_z)
//! z' = (1 - UG) ⊙ z + UG ⊙ z̃
//! ```

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{all_finite, sigmoid, Matrix};

/// Learnable weights of the cell. Every matrix is `d × 3d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatorParams {
    pub w_update: Matrix,
    pub w_neighbor: Matrix,
    pub w_community: Matrix,
    pub w_candidate: Matrix,
    pub b_update: Vec<f64>,
    pub b_neighbor: Vec<f64>,
    pub b_community: Vec<f64>,
    pub b_candidate: Vec<f64>,
}

impl AggregatorParams {
    pub fn zeros(dim: usize) -> Self {
        let m = || Matrix::zeros(dim, 3 * dim);
        Self {
            w_update: m(),
            w_neighbor: m(),
            w_community: m(),
            w_candidate: m(),
            b_update: vec![0.0; dim],
            b_neighbor: vec![0.0; dim],
            b_community: vec![0.0; dim],
            b_candidate: vec![0.0; dim],
        }
    }

    /// Matrices uniform in `[-a, a]` with `a = √(6 / (d + 3d))`, zero biases.
    pub fn init<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(dim);
        let a = (6.0 / (4 * dim) as f64).sqrt();
        for w in p.matrices_mut() {
            for x in w.as_mut_slice() {
                *x = rng.random_range(-a..=a);
            }
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.b_update.len()
    }

    pub fn matrices(&self) -> [&Matrix; 4] {
        [&self.w_update, &self.w_neighbor, &self.w_community, &self.w_candidate]
    }

    pub fn matrices_mut(&mut self) -> [&mut Matrix; 4] {
        [
            &mut self.w_update,
            &mut self.w_neighbor,
            &mut self.w_community,
            &mut self.w_candidate,
        ]
    }

    pub fn biases(&self) -> [&Vec<f64>; 4] {
        [&self.b_update, &self.b_neighbor, &self.b_community, &self.b_candidate]
    }

    /// All eight tensors as flat slices, matrices first, in the order of
    /// [`TENSOR_NAMES`](Self::TENSOR_NAMES).
    pub fn tensors(&self) -> [&[f64]; 8] {
        [
            self.w_update.as_slice(),
            self.w_neighbor.as_slice(),
            self.w_community.as_slice(),
            self.w_candidate.as_slice(),
            &self.b_update,
            &self.b_neighbor,
            &self.b_community,
            &self.b_candidate,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 8] {
        [
            self.w_update.as_mut_slice(),
            self.w_neighbor.as_mut_slice(),
            self.w_community.as_mut_slice(),
            self.w_candidate.as_mut_slice(),
            &mut self.b_update,
            &mut self.b_neighbor,
            &mut self.b_community,
            &mut self.b_candidate,
        ]
    }

    pub const TENSOR_NAMES: [&'static str; 8] =
        ["W_UG", "W_NG", "W_CG", "W_z", "b_UG", "b_NG", "b_CG", "b_z"];

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        for m in self.matrices() {
            if m.rows() != d || m.cols() != 3 * d {
                return Err(Error::dim("aggregator matrix", d * 3 * d, m.rows() * m.cols()));
            }
        }
        for b in self.biases() {
            if b.len() != d {
                return Err(Error::dim("aggregator bias", d, b.len()));
            }
        }
        Ok(())
    }
}

/// Gradients for every cell parameter, shaped like [`AggregatorParams`].
pub type CellGrads = AggregatorParams;

/// Activations saved by [`cell_forward`] for [`cell_backward`].
#[derive(Debug, Clone)]
pub struct CellTape {
    /// `[z ⊕ ne ⊕ co]`
    pub input: Vec<f64>,
    /// `[z ⊕ NG⊙ne ⊕ CG⊙co]`
    pub reset_input: Vec<f64>,
    pub update_gate: Vec<f64>,
    pub neighbor_gate: Vec<f64>,
    pub community_gate: Vec<f64>,
    pub candidate: Vec<f64>,
}

impl CellTape {
    pub fn dim(&self) -> usize {
        self.candidate.len()
    }
}

/// Gradients produced by [`cell_backward`].
#[derive(Debug, Clone)]
pub struct CellBackward {
    pub z_prev: Vec<f64>,
    pub ne: Vec<f64>,
    pub co: Vec<f64>,
    pub params: CellGrads,
}

pub fn cell_forward(
    z_prev: &[f64],
    ne: &[f64],
    co: &[f64],
    params: &AggregatorParams,
) -> Result<(Vec<f64>, CellTape)> {
    params.validate()?;
    let d = params.dim();
    for (what, v) in [("previous embedding", z_prev), ("neighborhood influence", ne), ("community influence", co)] {
        if v.len() != d {
            return Err(Error::dim(what, d, v.len()));
        }
        if !all_finite(v) {
            return Err(Error::NonFinite(what.into()));
        }
    }

    let input: Vec<f64> = z_prev.iter().chain(ne).chain(co).copied().collect();
    let gate = |w: &Matrix, b: &[f64]| -> Vec<f64> {
        w.affine(&input, b).into_iter().map(sigmoid).collect()
    };
    let update_gate = gate(&params.w_update, &params.b_update);
    let neighbor_gate = gate(&params.w_neighbor, &params.b_neighbor);
    let community_gate = gate(&params.w_community, &params.b_community);

    let mut reset_input = Vec::with_capacity(3 * d);
    reset_input.extend_from_slice(z_prev);
    reset_input.extend(neighbor_gate.iter().zip(ne).map(|(g, x)| g * x));
    reset_input.extend(community_gate.iter().zip(co).map(|(g, x)| g * x));
    let candidate: Vec<f64> = params
        .w_candidate
        .affine(&reset_input, &params.b_candidate)
        .into_iter()
        .map(f64::tanh)
        .collect();

    let z_new = z_prev
        .iter()
        .zip(&update_gate)
        .zip(&candidate)
        .map(|((z, u), h)| (1.0 - u) * z + u * h)
        .collect();
    Ok((
        z_new,
        CellTape {
            input,
            reset_input,
            update_gate,
            neighbor_gate,
            community_gate,
            candidate,
        },
    ))
}

/// Exact gradients of `⟨upstream, z_new⟩` with respect to every input and
/// parameter of the matching forward call.
pub fn cell_backward(
    tape: &CellTape,
    upstream: &[f64],
    params: &AggregatorParams,
) -> Result<CellBackward> {
    let d = tape.dim();
    if upstream.len() != d {
        return Err(Error::dim("cell upstream", d, upstream.len()));
    }
    if params.dim() != d {
        return Err(Error::dim("cell parameters", d, params.dim()));
    }
    let z_prev = &tape.input[..d];
    let ne = &tape.input[d..2 * d];
    let co = &tape.input[2 * d..];
    let mut grads = CellGrads::zeros(d);

    // z' = (1 - UG) z + UG z̃
    let mut g_input = vec![0.0; 3 * d];
    let mut g_pre_update = vec![0.0; d];
    let mut g_pre_candidate = vec![0.0; d];
    for j in 0..d {
        let (u, h, g) = (tape.update_gate[j], tape.candidate[j], upstream[j]);
        g_input[j] = g * (1.0 - u);
        g_pre_update[j] = g * (h - z_prev[j]) * u * (1.0 - u);
        g_pre_candidate[j] = g * u * (1.0 - h * h);
    }

    grads.w_candidate.add_outer(1.0, &g_pre_candidate, &tape.reset_input);
    grads.b_candidate.copy_from_slice(&g_pre_candidate);
    let mut g_reset = vec![0.0; 3 * d];
    params.w_candidate.add_transpose_mul(&g_pre_candidate, &mut g_reset);

    let mut g_pre_neighbor = vec![0.0; d];
    let mut g_pre_community = vec![0.0; d];
    for j in 0..d {
        g_input[j] += g_reset[j];
        let (ng, cg) = (tape.neighbor_gate[j], tape.community_gate[j]);
        let g_n = g_reset[d + j];
        let g_c = g_reset[2 * d + j];
        g_input[d + j] += g_n * ng;
        g_input[2 * d + j] += g_c * cg;
        g_pre_neighbor[j] = g_n * ne[j] * ng * (1.0 - ng);
        g_pre_community[j] = g_c * co[j] * cg * (1.0 - cg);
    }

    for (w, gw, gb, g_pre) in [
        (&params.w_update, &mut grads.w_update, &mut grads.b_update, &g_pre_update),
        (&params.w_neighbor, &mut grads.w_neighbor, &mut grads.b_neighbor, &g_pre_neighbor),
        (&params.w_community, &mut grads.w_community, &mut grads.b_community, &g_pre_community),
    ] {
        gw.add_outer(1.0, g_pre, &tape.input);
        gb.copy_from_slice(g_pre);
        w.add_transpose_mul(g_pre, &mut g_input);
    }

    Ok(CellBackward {
        z_prev: g_input[..d].to_vec(),
        ne: g_input[d..2 * d].to_vec(),
        co: g_input[2 * d..].to_vec(),
        params: grads,
    })
}
