use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Draws nodes with probability proportional to `degree^0.75`.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    cdf: Vec<f64>,
    rng: ChaCha8Rng,
}

impl NegativeSampler {
    pub const POWER: f64 = 0.75;

    pub fn from_degrees(degrees: &[usize], seed: u64) -> Result<Self> {
        let mass: Vec<f64> = degrees.iter().map(|&d| (d as f64).powf(Self::POWER)).collect();
        let total: f64 = mass.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::NoEligibleNegatives);
        }
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = mass
            .iter()
            .map(|m| {
                acc += m / total;
                acc
            })
            .collect();
        // pin the tail exactly so draws in [0, 1) always land
        if let Some(&top) = cdf.last() {
            for c in cdf.iter_mut().rev().take_while(|c| **c == top) {
                *c = 1.0;
            }
        }
        Ok(Self {
            cdf,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Restarts the generator on an independent stream.
    pub fn reseed(&mut self, seed: u64, stream: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.rng.set_stream(stream);
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    pub fn probability(&self, node: usize) -> f64 {
        let prev = if node == 0 { 0.0 } else { self.cdf[node - 1] };
        self.cdf[node] - prev
    }

    fn draw_one(&mut self) -> usize {
        let u: f64 = self.rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }

    /// `count` i.i.d. draws, rejecting anything in `exclude`.
    pub fn draw(&mut self, count: usize, exclude: &[usize]) -> Result<Vec<usize>> {
        let eligible = (0..self.cdf.len()).any(|n| self.probability(n) > 0.0 && !exclude.contains(&n));
        if !eligible {
            return Err(Error::NoEligibleNegatives);
        }
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let n = self.draw_one();
            if !exclude.contains(&n) {
                out.push(n);
            }
        }
        Ok(out)
    }
}
