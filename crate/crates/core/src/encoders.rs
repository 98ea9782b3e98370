//! Sinusoidal positional encoding for initial embeddings and the learnable
//! Fourier time encoding.
//!
//! Positional layout is `[sin, cos, sin, cos, ...]`; the time encoding uses
//! `[cos, sin, cos, sin, ...]`.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::Config(format!("dim must be even and positive, got {dim}")));
    }
    Ok(())
}

/// Encodes a node's arrival position into a `dim`-vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PositionalEncoder {
    dim: usize,
}

impl PositionalEncoder {
    pub fn new(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Angular frequency of pair `i`: `10000^(-2i/d)`.
    pub fn frequency(&self, pair: usize) -> f64 {
        1.0 / 10000f64.powf(2.0 * pair as f64 / self.dim as f64)
    }

    pub fn encode(&self, position: usize) -> Vec<f64> {
        let p = position as f64;
        let mut out = Vec::with_capacity(self.dim);
        for i in 0..self.dim / 2 {
            let angle = p / 10000f64.powf(2.0 * i as f64 / self.dim as f64);
            out.push(angle.sin());
            out.push(angle.cos());
        }
        out
    }
}

/// `positional_encode(p, d)[2i] = sin(p / 10000^(2i/d))`, `[2i+1]` the cosine.
pub fn positional_encode(position: usize, dim: usize) -> Result<Vec<f64>> {
    Ok(PositionalEncoder::new(dim)?.encode(position))
}

/// Random Fourier time features with learnable frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeEncoder {
    omega: Vec<f64>,
}

impl TimeEncoder {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::Config("time encoder needs at least one frequency".into()));
        }
        if !crate::math::all_finite(&omega) {
            return Err(Error::NonFinite("omega".into()));
        }
        Ok(Self { omega })
    }

    /// Frequencies drawn i.i.d. from `N(0, std²)`.
    pub fn random<R: Rng + ?Sized>(dim: usize, std: f64, rng: &mut R) -> Result<Self> {
        check_dim(dim)?;
        let normal = Normal::new(0.0, std)
            .map_err(|e| Error::Config(format!("frequency scale {std}: {e}")))?;
        Self::new((0..dim / 2).map(|_| normal.sample(rng)).collect())
    }

    pub fn dim(&self) -> usize {
        2 * self.omega.len()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn omega_mut(&mut self) -> &mut [f64] {
        &mut self.omega
    }

    fn check_delta(delta_t: f64) -> Result<()> {
        if !(delta_t >= 0.0 && delta_t.is_finite()) {
            return Err(Error::Contract(format!(
                "time delta must be finite and non-negative, got {delta_t}"
            )));
        }
        Ok(())
    }

    /// `[cos(ω₁Δt), sin(ω₁Δt), …, cos(ω_{d/2}Δt), sin(ω_{d/2}Δt)]`
    pub fn encode(&self, delta_t: f64) -> Result<Vec<f64>> {
        Self::check_delta(delta_t)?;
        let mut out = Vec::with_capacity(self.dim());
        for &w in &self.omega {
            let (s, c) = (w * delta_t).sin_cos();
            out.push(c);
            out.push(s);
        }
        Ok(out)
    }

    /// Gradient of `⟨upstream, encode(Δt)⟩` with respect to the frequencies.
    pub fn backward(&self, delta_t: f64, upstream: &[f64]) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; self.omega.len()];
        self.accumulate_backward(delta_t, upstream, &mut grad)?;
        Ok(grad)
    }

    /// Like [`backward`](Self::backward) but adds into `grad`.
    pub fn accumulate_backward(&self, delta_t: f64, upstream: &[f64], grad: &mut [f64]) -> Result<()> {
        Self::check_delta(delta_t)?;
        if upstream.len() != self.dim() {
            return Err(Error::dim("time encoder upstream", self.dim(), upstream.len()));
        }
        if grad.len() != self.omega.len() {
            return Err(Error::dim("omega gradient", self.omega.len(), grad.len()));
        }
        for (k, (&w, g)) in self.omega.iter().zip(grad.iter_mut()).enumerate() {
            let (s, c) = (w * delta_t).sin_cos();
            *g += upstream[2 * k] * (-delta_t * s) + upstream[2 * k + 1] * (delta_t * c);
        }
        Ok(())
    }
}
