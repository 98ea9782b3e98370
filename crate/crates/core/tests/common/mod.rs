#![allow(dead_code, clippy::needless_range_loop)]

pub mod grad;

use mnci::math::{sigmoid, Matrix};
use mnci::{synth_planted_graph, AggregatorParams, TemporalGraph, TrainConfig, Trainer};
pub use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-6;
pub const GRAD_RTOL: f64 = 1e-4;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

pub fn random_params(rng: &mut ChaCha8Rng, d: usize) -> AggregatorParams {
    let mut p = AggregatorParams::init(d, rng);
    for b in [&mut p.b_update, &mut p.b_neighbor, &mut p.b_community, &mut p.b_candidate] {
        for x in b.iter_mut() {
            *x = rng.random_range(-0.5..0.5);
        }
    }
    p
}

/// Relative error with the floor used throughout the gradient checks.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// A central difference at `FD_STEP` together with an estimate of its
/// rounding noise, taken from the spread against the quotients at half and
/// twice the step. Truncation error at these steps is far below the noise, so
/// the spread measures rounding only and is blind to a wrong analytic value.
#[derive(Debug, Clone, Copy)]
pub struct Fd {
    pub value: f64,
    pub noise: f64,
}

/// Builds an `Fd` from a function of the signed offset along one coordinate.
pub fn fd_along(f: impl FnMut(f64) -> f64) -> Fd {
    fd_along_scaled(1.0, f)
}

/// As `fd_along`, for an objective that sums terms as large as `scale`; the
/// rounding in those terms survives their cancellation.
pub fn fd_along_scaled(scale: f64, mut f: impl FnMut(f64) -> f64) -> Fd {
    let h = FD_STEP;
    let (p1, m1) = (f(h), f(-h));
    let value = (p1 - m1) / (2.0 * h);
    let wide = (f(2.0 * h) - f(-2.0 * h)) / (4.0 * h);
    let narrow = (f(0.5 * h) - f(-0.5 * h)) / h;
    let spread = (value - wide).abs().max((value - narrow).abs());
    let rounding = 8.0 * f64::EPSILON * p1.abs().max(m1.abs()).max(scale) / h;
    Fd { value, noise: rounding.max(4.0 * spread) }
}

/// Central difference of `f` along coordinate `i` of `x`.
pub fn central_diff(x: &mut [f64], i: usize, mut f: impl FnMut(&[f64]) -> f64) -> Fd {
    let orig = x[i];
    let fd = fd_along(|off| {
        x[i] = orig + off;
        f(x)
    });
    x[i] = orig;
    fd
}

/// Relative error at `tol`, except that differences below the rounding noise
/// of the difference quotient itself are accepted.
pub fn grad_ok(analytic: f64, fd: Fd, tol: f64) -> bool {
    let diff = (analytic - fd.value).abs();
    diff <= tol * analytic.abs().max(fd.value.abs()).max(1e-8) || diff <= fd.noise
}

/// Straight-loop normalized `σ(-‖z - o‖²)`.
pub fn scalar_affinity(z: &[f64], others: &[Vec<f64>]) -> Vec<f64> {
    let raw: Vec<f64> = others
        .iter()
        .map(|o| {
            let mut d = 0.0;
            for j in 0..z.len() {
                d += (z[j] - o[j]) * (z[j] - o[j]);
            }
            sigmoid(-d)
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|r| r / total).collect()
}

/// Straight-loop reference of the gated cell, written independently of the
/// library's slice helpers.
pub fn reference_cell(z: &[f64], ne: &[f64], co: &[f64], p: &AggregatorParams) -> Vec<f64> {
    let d = z.len();
    let mut x = vec![0.0; 3 * d];
    for j in 0..d {
        x[j] = z[j];
        x[d + j] = ne[j];
        x[2 * d + j] = co[j];
    }
    let affine = |w: &Matrix, b: &[f64], input: &[f64], r: usize| {
        let mut s = b[r];
        for c in 0..3 * d {
            s += w.get(r, c) * input[c];
        }
        s
    };
    let mut ug = vec![0.0; d];
    let mut ng = vec![0.0; d];
    let mut cg = vec![0.0; d];
    for r in 0..d {
        ug[r] = sigmoid(affine(&p.w_update, &p.b_update, &x, r));
        ng[r] = sigmoid(affine(&p.w_neighbor, &p.b_neighbor, &x, r));
        cg[r] = sigmoid(affine(&p.w_community, &p.b_community, &x, r));
    }
    let mut reset = vec![0.0; 3 * d];
    for j in 0..d {
        reset[j] = z[j];
        reset[d + j] = ng[j] * ne[j];
        reset[2 * d + j] = cg[j] * co[j];
    }
    let mut out = vec![0.0; d];
    for r in 0..d {
        let h = affine(&p.w_candidate, &p.b_candidate, &reset, r).tanh();
        out[r] = (1.0 - ug[r]) * z[r] + ug[r] * h;
    }
    out
}

/// A trainer on a small planted graph, advanced by `warmup` events so the
/// histories, embeddings and communities are non-trivial.
pub fn warmed_trainer(dim: usize, seed: u64, warmup: usize) -> (Trainer, TemporalGraph) {
    let planted = synth_planted_graph(6, 2, 0.8, 4, seed).unwrap();
    let config = TrainConfig {
        dim,
        communities: 2,
        negatives: 2,
        batch_size: 1_000_000,
        seed,
        ..TrainConfig::default()
    };
    let mut t = Trainer::new(&planted.graph, config).unwrap();
    let mut r = rng(seed ^ 0xabc);
    for n in t.nodes_mut() {
        n.delta_ne = r.random_range(0.5..1.5);
        n.delta_co = r.random_range(0.5..1.5);
    }
    t.reset_stream().unwrap();
    let events = t.events().to_vec();
    for &(u, v, time) in &events[..warmup] {
        t.process_event(u, v, time, false).unwrap();
    }
    (t, planted.graph)
}
