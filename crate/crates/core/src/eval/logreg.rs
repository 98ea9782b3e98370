//! Multinomial logistic regression fitted by full-batch gradient descent
//! with a backtracking line search.
//!
//! Objective: `Σ_i -log p(y_i | x_i) + (λ/2) ‖W‖²` with an unpenalized bias.
//! Features are standardized with the training set's mean and deviation.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegConfig {
    pub l2: f64,
    /// Relative change of the objective at which descent stops.
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self {
            l2: 1.0,
            tolerance: 1e-6,
            max_iters: 10_000,
        }
    }
}

/// Fitted classifier. `weights[c]` scores class `classes[c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    pub classes: Vec<i64>,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    mean: Vec<f64>,
    scale: Vec<f64>,
    pub iterations: usize,
    pub objective: f64,
}

struct Problem<'a> {
    x: Vec<Vec<f64>>,
    y: &'a [usize],
    classes: usize,
    dim: usize,
    l2: f64,
}

impl Problem<'_> {
    /// Parameters are laid out as `classes × (dim + 1)`, bias last.
    fn objective(&self, theta: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let stride = self.dim + 1;
        let mut f = 0.0;
        let mut grad = grad;
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let mut scores = vec![0.0; self.classes];
        for (xi, &yi) in self.x.iter().zip(self.y) {
            for (c, s) in scores.iter_mut().enumerate() {
                let w = &theta[c * stride..(c + 1) * stride];
                *s = w[self.dim] + xi.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
            }
            let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = top + scores.iter().map(|s| (s - top).exp()).sum::<f64>().ln();
            f += lse - scores[yi];
            if let Some(g) = grad.as_deref_mut() {
                for (c, s) in scores.iter().enumerate() {
                    let r = (s - lse).exp() - if c == yi { 1.0 } else { 0.0 };
                    let gc = &mut g[c * stride..(c + 1) * stride];
                    for (gj, xj) in gc.iter_mut().zip(xi) {
                        *gj += r * xj;
                    }
                    gc[self.dim] += r;
                }
            }
        }
        for c in 0..self.classes {
            let w = &theta[c * stride..c * stride + self.dim];
            f += 0.5 * self.l2 * w.iter().map(|v| v * v).sum::<f64>();
            if let Some(g) = grad.as_deref_mut() {
                for (gj, wj) in g[c * stride..c * stride + self.dim].iter_mut().zip(w) {
                    *gj += self.l2 * wj;
                }
            }
        }
        f
    }
}

fn standardize(rows: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let d = rows[0].len();
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(*r) {
            *m += x / n;
        }
    }
    let mut scale = vec![0.0; d];
    for r in rows {
        for ((s, x), m) in scale.iter_mut().zip(*r).zip(&mean) {
            *s += (x - m) * (x - m) / n;
        }
    }
    for s in &mut scale {
        *s = if *s > 1e-24 { s.sqrt() } else { 1.0 };
    }
    (mean, scale)
}

impl ClassifierModel {
    pub fn fit(features: &[&[f64]], labels: &[i64], config: &LogRegConfig) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Contract("cannot fit a classifier without samples".into()));
        }
        if features.len() != labels.len() {
            return Err(Error::dim("classifier labels", features.len(), labels.len()));
        }
        let dim = features[0].len();
        let mut classes: Vec<i64> = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        let y: Vec<usize> = labels
            .iter()
            .map(|l| classes.binary_search(l).expect("label collected above"))
            .collect();
        let (mean, scale) = standardize(features);
        let x: Vec<Vec<f64>> = features
            .iter()
            .map(|r| r.iter().zip(&mean).zip(&scale).map(|((v, m), s)| (v - m) / s).collect())
            .collect();
        let problem = Problem {
            x,
            y: &y,
            classes: classes.len(),
            dim,
            l2: config.l2,
        };

        let stride = dim + 1;
        let mut theta = vec![0.0; classes.len() * stride];
        let mut grad = vec![0.0; theta.len()];
        let mut f = problem.objective(&theta, Some(&mut grad));
        let mut step = 1.0;
        let mut iterations = 0;
        while iterations < config.max_iters {
            iterations += 1;
            let g2: f64 = grad.iter().map(|g| g * g).sum();
            if g2 == 0.0 {
                break;
            }
            // Armijo backtracking
            let mut t = step;
            let (candidate, f_new) = loop {
                let cand: Vec<f64> = theta.iter().zip(&grad).map(|(w, g)| w - t * g).collect();
                let fc = problem.objective(&cand, None);
                if fc <= f - 0.5 * t * g2 || t < 1e-20 {
                    break (cand, fc);
                }
                t *= 0.5;
            };
            let improvement = f - f_new;
            theta = candidate;
            f = problem.objective(&theta, Some(&mut grad));
            step = t * 2.0;
            if improvement.abs() <= config.tolerance * f.abs().max(1.0) {
                break;
            }
        }
        if !f.is_finite() || !crate::math::all_finite(&theta) {
            return Err(Error::NonFinite("classifier weights".into()));
        }

        let (weights, bias) = theta
            .chunks(stride)
            .map(|c| (c[..dim].to_vec(), c[dim]))
            .unzip();
        Ok(Self {
            classes,
            weights,
            bias,
            mean,
            scale,
            iterations,
            objective: f,
        })
    }

    pub fn predict(&self, x: &[f64]) -> i64 {
        let z: Vec<f64> = x
            .iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (c, (w, b)) in self.weights.iter().zip(&self.bias).enumerate() {
            let s = b + crate::math::dot(w, &z);
            if s > best_score {
                best = c;
                best_score = s;
            }
        }
        self.classes[best]
    }
}
