//! The two objective terms and their exact gradients.
//!
//! Both are log-likelihood style quantities; the trainer minimizes their
//! negation.

use crate::error::{Error, Result};
use crate::influence::{argmax, CommunityModel};
use crate::math::{log_sigmoid, sigmoid, sq_dist};

#[derive(Debug, Clone)]
pub struct PairTerm {
    pub value: f64,
    pub grad_u: Vec<f64>,
    pub grad_v: Vec<f64>,
    pub grad_negatives: Vec<Vec<f64>>,
}

/// `log σ(-‖z_u - z_v‖²) - Σ_n log σ(-‖z_u - z_n‖²)`.
///
/// The expectation over the noise distribution is the empirical mean of the
/// `Q` draws, so the `Q` factor and the `1/Q` mean cancel.
pub fn pair_term(z_u: &[f64], z_v: &[f64], negatives: &[&[f64]], q: usize) -> Result<PairTerm> {
    if negatives.len() != q {
        return Err(Error::Contract(format!(
            "expected {q} negative samples, got {}",
            negatives.len()
        )));
    }
    let d = z_u.len();
    for v in std::iter::once(&z_v).chain(negatives) {
        if v.len() != d {
            return Err(Error::dim("pair term embedding", d, v.len()));
        }
    }

    let pos = sq_dist(z_u, z_v);
    let mut value = log_sigmoid(-pos);
    // ∂/∂z_u log σ(-‖z_u - x‖²) = -2 σ(‖z_u - x‖²) (z_u - x)
    let s = 2.0 * sigmoid(pos);
    let mut grad_u: Vec<f64> = z_u.iter().zip(z_v).map(|(a, b)| -s * (a - b)).collect();
    let grad_v = grad_u.iter().map(|g| -g).collect();

    let mut grad_negatives = Vec::with_capacity(q);
    for z_n in negatives {
        let dist = sq_dist(z_u, z_n);
        value -= log_sigmoid(-dist);
        let s = 2.0 * sigmoid(dist);
        let mut g_n = Vec::with_capacity(d);
        for ((gu, a), b) in grad_u.iter_mut().zip(z_u).zip(z_n.iter()) {
            *gu += s * (a - b);
            g_n.push(-s * (a - b));
        }
        grad_negatives.push(g_n);
    }
    Ok(PairTerm {
        value,
        grad_u,
        grad_v,
        grad_negatives,
    })
}

#[derive(Debug, Clone)]
pub struct CommunityTerm {
    pub value: f64,
    /// Community holding the largest weight.
    pub best: usize,
    pub grad_u: Vec<f64>,
    pub grad_communities: Vec<Vec<f64>>,
}

/// `max_k log a(u, c_k)` with gradients through the normalization.
pub fn community_term(z_u: &[f64], com: &CommunityModel) -> Result<CommunityTerm> {
    let weights = com.weights(z_u)?;
    let best = argmax(&weights);
    let d = z_u.len();

    // ∇_z log s_k = -2 σ(D_k) (z - c_k) where s_k = σ(-D_k)
    let slopes: Vec<Vec<f64>> = com
        .embeddings()
        .iter()
        .map(|c| {
            let s = 2.0 * sigmoid(sq_dist(z_u, c));
            z_u.iter().zip(c).map(|(a, b)| -s * (a - b)).collect()
        })
        .collect();

    let mut grad_u = slopes[best].clone();
    let mut grad_communities = vec![vec![0.0; d]; com.k()];
    for (j, (slope, &a)) in slopes.iter().zip(&weights).enumerate() {
        for i in 0..d {
            grad_u[i] -= a * slope[i];
            // ∇_c log s_k = -∇_z log s_k
            grad_communities[j][i] += a * slope[i];
        }
    }
    for i in 0..d {
        grad_communities[best][i] -= slopes[best][i];
    }

    Ok(CommunityTerm {
        value: weights[best].ln(),
        best,
        grad_u,
        grad_communities,
    })
}
