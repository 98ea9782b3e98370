//! Finite-difference checks shared by the gradient tests and the acceptance
//! runner. Each returns the number of components compared.

use super::*;
use mnci::aggregator::{cell_backward, cell_forward};
use mnci::trainer::{community_term, pair_term};
use mnci::{AggregatorParams, CommunityModel, TimeEncoder, Trainer};

pub type Checked = Result<usize, String>;

fn check(label: impl FnOnce() -> String, analytic: f64, fd: Fd, tol: f64) -> Result<(), String> {
    if grad_ok(analytic, fd, tol) {
        return Ok(());
    }
    Err(format!(
        "{}: analytic {analytic} vs numeric {} (rel {:.2e}, noise {:.1e})",
        label(),
        fd.value,
        rel_err(analytic, fd.value),
        fd.noise
    ))
}

pub fn dim_for(seed: u64) -> usize {
    if seed.is_multiple_of(2) {
        4
    } else {
        8
    }
}

pub fn cell(seed: u64) -> Checked {
    let d = dim_for(seed);
    let mut r = rng(seed);
    let params = random_params(&mut r, d);
    let inputs = [random_vec(&mut r, d, 1.0), random_vec(&mut r, d, 1.5), random_vec(&mut r, d, 1.5)];
    let up = random_vec(&mut r, d, 1.0);
    let (_, tape) = cell_forward(&inputs[0], &inputs[1], &inputs[2], &params).map_err(|e| e.to_string())?;
    let g = cell_backward(&tape, &up, &params).map_err(|e| e.to_string())?;
    let objective = |p: &AggregatorParams, ins: &[Vec<f64>; 3]| -> f64 {
        let (z, _) = cell_forward(&ins[0], &ins[1], &ins[2], p).unwrap();
        z.iter().zip(&up).map(|(a, b)| a * b).sum()
    };

    let mut n = 0;
    let input_grads = [&g.z_prev, &g.ne, &g.co];
    for which in 0..3 {
        for i in 0..d {
            let fd = central_diff(&mut inputs[which].clone(), i, |x| {
                let mut local = inputs.clone();
                local[which] = x.to_vec();
                objective(&params, &local)
            });
            check(|| format!("seed {seed} input {which}[{i}]"), input_grads[which][i], fd, GRAD_RTOL)?;
            n += 1;
        }
    }
    let analytic = g.params.tensors().map(|t| t.to_vec());
    for (t, name) in AggregatorParams::TENSOR_NAMES.iter().enumerate() {
        for i in 0..analytic[t].len() {
            let fd = central_diff(&mut params.tensors()[t].to_vec(), i, |x| {
                let mut local = params.clone();
                local.tensors_mut()[t].copy_from_slice(x);
                objective(&local, &inputs)
            });
            check(|| format!("seed {seed} {name}[{i}]"), analytic[t][i], fd, GRAD_RTOL)?;
            n += 1;
        }
    }
    Ok(n)
}

pub fn time_encoder(seed: u64) -> Checked {
    let d = dim_for(seed);
    let mut r = rng(100 + seed);
    let omega = random_vec(&mut r, d / 2, 2.0);
    let dt: f64 = r.random_range(0.0..5.0);
    let up = random_vec(&mut r, d, 1.0);
    let enc = TimeEncoder::new(omega.clone()).map_err(|e| e.to_string())?;
    let g = enc.backward(dt, &up).map_err(|e| e.to_string())?;
    for k in 0..d / 2 {
        let fd = central_diff(&mut omega.clone(), k, |w| {
            let e = TimeEncoder::new(w.to_vec()).unwrap().encode(dt).unwrap();
            e.iter().zip(&up).map(|(a, b)| a * b).sum()
        });
        check(|| format!("seed {seed} omega[{k}]"), g[k], fd, GRAD_RTOL)?;
    }
    Ok(d / 2)
}

pub fn pair(seed: u64) -> Checked {
    let d = dim_for(seed);
    let q = 3;
    let mut r = rng(200 + seed);
    let mut all: Vec<Vec<f64>> = (0..q + 2).map(|_| random_vec(&mut r, d, 1.0)).collect();
    let value = |vs: &[Vec<f64>]| {
        let negs: Vec<&[f64]> = vs[2..].iter().map(Vec::as_slice).collect();
        pair_term(&vs[0], &vs[1], &negs, q).unwrap()
    };
    let t = value(&all);
    let analytic: Vec<&Vec<f64>> = [&t.grad_u, &t.grad_v].into_iter().chain(&t.grad_negatives).collect();
    let mut n = 0;
    for which in 0..q + 2 {
        for i in 0..d {
            let snapshot = all.clone();
            let fd = central_diff(&mut all[which], i, |x| {
                let mut local = snapshot.clone();
                local[which] = x.to_vec();
                value(&local).value
            });
            // z_u is held to the tighter 1e-6.
            let tol = if which == 0 { 1e-6 } else { GRAD_RTOL };
            check(|| format!("seed {seed} vector {which}[{i}]"), analytic[which][i], fd, tol)?;
            n += 1;
        }
    }
    Ok(n)
}

pub fn community(seed: u64) -> Checked {
    let d = dim_for(seed);
    let k = 3;
    let mut r = rng(300 + seed);
    let mut all: Vec<Vec<f64>> = (0..k + 1).map(|_| random_vec(&mut r, d, 0.8)).collect();
    let value = |vs: &[Vec<f64>]| {
        let com = CommunityModel::new(vs[1..].to_vec()).unwrap();
        community_term(&vs[0], &com).unwrap()
    };
    let t = value(&all);
    let analytic: Vec<&Vec<f64>> = std::iter::once(&t.grad_u).chain(&t.grad_communities).collect();
    let mut n = 0;
    for which in 0..k + 1 {
        for i in 0..d {
            let snapshot = all.clone();
            let fd = central_diff(&mut all[which], i, |x| {
                let mut local = snapshot.clone();
                local[which] = x.to_vec();
                value(&local).value
            });
            check(|| format!("seed {seed} vector {which}[{i}]"), analytic[which][i], fd, GRAD_RTOL)?;
            n += 1;
        }
    }
    Ok(n)
}

/// Every learnable tensor against the frozen loss of one event on a tiny
/// planted graph (K=2, Q=2).
pub fn event(seed: u64) -> Checked {
    let d = dim_for(seed);
    let (mut trainer, _) = warmed_trainer(d, seed, 20);
    let (src, dst, time) = trainer.events()[20];
    let negatives = trainer.draw_negatives(src, dst).map_err(|e| e.to_string())?;
    let base = trainer.event_objective(src, dst, time, &negatives).map_err(|e| e.to_string())?;
    // The pair term sums log-sigmoids of squared distances that largely
    // cancel; their total magnitude sets the rounding floor.
    let scale: f64 = std::iter::once(base.z_dst.as_slice())
        .chain(negatives.iter().map(|&n| trainer.nodes()[n].embedding.as_slice()))
        .map(|z| mnci::math::sq_dist(&base.z_src, z) + 1.0)
        .sum();
    let loss_of = |t: &Trainer| t.event_objective(src, dst, time, &negatives).unwrap().loss;

    let mut n = 0;
    let cell = base.grads.cell.tensors().map(|t| t.to_vec());
    for (ti, name) in AggregatorParams::TENSOR_NAMES.iter().enumerate() {
        for i in 0..cell[ti].len() {
            let mut tr = trainer.clone();
            let orig = tr.params().tensors()[ti][i];
            let fd = fd_along_scaled(scale, |off| {
                tr.params_mut().tensors_mut()[ti][i] = orig + off;
                loss_of(&tr)
            });
            check(|| format!("seed {seed} {name}[{i}]"), cell[ti][i], fd, GRAD_RTOL)?;
            n += 1;
        }
    }
    for k in 0..d / 2 {
        let mut tr = trainer.clone();
        let orig = tr.time_encoder().omega()[k];
        let fd = fd_along_scaled(scale, |off| {
            tr.time_encoder_mut().omega_mut()[k] = orig + off;
            loss_of(&tr)
        });
        check(|| format!("seed {seed} omega[{k}]"), base.grads.omega[k], fd, GRAD_RTOL)?;
        n += 1;
    }
    for &(node, g_ne, g_co) in &base.grads.delta {
        for (which, analytic) in [(0, g_ne), (1, g_co)] {
            let mut tr = trainer.clone();
            let orig = if which == 0 { tr.nodes()[node].delta_ne } else { tr.nodes()[node].delta_co };
            let fd = fd_along_scaled(scale, |off| {
                let state = &mut tr.nodes_mut()[node];
                if which == 0 {
                    state.delta_ne = orig + off;
                } else {
                    state.delta_co = orig + off;
                }
                loss_of(&tr)
            });
            check(|| format!("seed {seed} delta{which}[{node}]"), analytic, fd, GRAD_RTOL)?;
            n += 1;
        }
    }
    Ok(n)
}
