//! Versioned text checkpoints.
//!
//! ```text
//! mnci-checkpoint v1 <d> <K>
//! <name> <shape> <values...>
//! ```
//!
//! Shapes are `x`-joined dimensions. Real values are written with 17
//! significant digits and always contain a decimal point; integer tensors
//! (ids, counters, sizes) are written as plain integers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::adam::{Moments, ScalarMoments};
use super::{TrainConfig, Trainer};
use crate::aggregator::AggregatorParams;
use crate::error::{Error, Result};
use crate::ingest::TemporalGraph;

const MAGIC: &str = "mnci-checkpoint";
const VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq)]
pub enum TensorValues {
    Real(Vec<f64>),
    Int(Vec<u64>),
}

impl TensorValues {
    fn len(&self) -> usize {
        match self {
            TensorValues::Real(v) => v.len(),
            TensorValues::Int(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: TensorValues,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub dim: usize,
    pub communities: usize,
    pub tensors: Vec<Tensor>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

impl Checkpoint {
    fn push_real(&mut self, name: impl Into<String>, shape: Vec<usize>, values: &[f64]) {
        self.tensors.push(Tensor {
            name: name.into(),
            shape,
            values: TensorValues::Real(values.to_vec()),
        });
    }

    fn push_int(&mut self, name: impl Into<String>, values: Vec<u64>) {
        self.tensors.push(Tensor {
            name: name.into(),
            shape: vec![values.len()],
            values: TensorValues::Int(values),
        });
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.tensors
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| bad(format!("missing tensor {name}")))
    }

    pub fn real(&self, name: &str) -> Result<&[f64]> {
        match &self.get(name)?.values {
            TensorValues::Real(v) => Ok(v),
            TensorValues::Int(_) => Err(bad(format!("tensor {name} is not real-valued"))),
        }
    }

    pub fn int(&self, name: &str) -> Result<&[u64]> {
        match &self.get(name)?.values {
            TensorValues::Int(v) => Ok(v),
            TensorValues::Real(_) => Err(bad(format!("tensor {name} is not integer-valued"))),
        }
    }

    fn real_scalar(&self, name: &str) -> Result<f64> {
        self.real(name)?
            .first()
            .copied()
            .ok_or_else(|| bad(format!("tensor {name} is empty")))
    }

    fn int_scalar(&self, name: &str) -> Result<u64> {
        self.int(name)?
            .first()
            .copied()
            .ok_or_else(|| bad(format!("tensor {name} is empty")))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC} {VERSION} {} {}\n", self.dim, self.communities);
        for t in &self.tensors {
            let shape: Vec<String> = t.shape.iter().map(usize::to_string).collect();
            out.push_str(&t.name);
            out.push(' ');
            out.push_str(&shape.join("x"));
            match &t.values {
                TensorValues::Real(v) => v.iter().for_each(|x| {
                    let _ = write!(out, " {x:.16e}");
                }),
                TensorValues::Int(v) => v.iter().for_each(|x| {
                    let _ = write!(out, " {x}");
                }),
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != MAGIC {
            return Err(bad(format!("bad header {header:?}")));
        }
        if h[1] != VERSION {
            return Err(bad(format!("unsupported version {}", h[1])));
        }
        let dim = h[2].parse().map_err(|_| bad("bad dimension in header"))?;
        let communities = h[3].parse().map_err(|_| bad("bad community count in header"))?;

        let mut tensors = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let lineno = i + 2;
            let mut toks = line.split_whitespace();
            let name = toks.next().ok_or_else(|| bad(format!("line {lineno}: empty")))?;
            let shape: Vec<usize> = toks
                .next()
                .ok_or_else(|| bad(format!("line {lineno}: missing shape")))?
                .split('x')
                .map(|s| s.parse().map_err(|_| bad(format!("line {lineno}: bad shape"))))
                .collect::<Result<_>>()?;
            let raw: Vec<&str> = toks.collect();
            let is_real = raw
                .iter()
                .any(|s| s.contains(['.', 'e', 'E', 'n', 'N', 'i']));
            let values = if is_real {
                TensorValues::Real(
                    raw.iter()
                        .map(|s| s.parse().map_err(|_| bad(format!("line {lineno}: bad value {s:?}"))))
                        .collect::<Result<_>>()?,
                )
            } else {
                TensorValues::Int(
                    raw.iter()
                        .map(|s| s.parse().map_err(|_| bad(format!("line {lineno}: bad value {s:?}"))))
                        .collect::<Result<_>>()?,
                )
            };
            let expected: usize = shape.iter().product();
            if values.len() != expected {
                return Err(bad(format!(
                    "line {lineno}: {name} has {} values for shape {:?}",
                    values.len(),
                    shape
                )));
            }
            tensors.push(Tensor {
                name: name.to_owned(),
                shape,
                values,
            });
        }
        Ok(Self {
            dim,
            communities,
            tensors,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Hyperparameters stored in the checkpoint.
    pub fn config(&self) -> Result<TrainConfig> {
        Ok(TrainConfig {
            dim: self.dim,
            learning_rate: self.real_scalar("learning_rate")?,
            batch_size: self.int_scalar("batch_size")? as usize,
            negatives: self.int_scalar("negatives")? as usize,
            communities: self.communities,
            epochs: self.int_scalar("epochs")? as usize,
            history_cap: self.int_scalar("history_cap")? as usize,
            seed: self.int_scalar("seed")?,
            time_scale: Some(self.real_scalar("time_scale")?),
            adam_beta1: self.real_scalar("adam_beta1")?,
            adam_beta2: self.real_scalar("adam_beta2")?,
            adam_eps: self.real_scalar("adam_eps")?,
        })
    }
}

fn copy_into(dst: &mut [f64], src: &[f64], name: &str) -> Result<()> {
    if dst.len() != src.len() {
        return Err(bad(format!("tensor {name}: expected {} values, got {}", dst.len(), src.len())));
    }
    dst.copy_from_slice(src);
    Ok(())
}

impl Trainer {
    /// Snapshot of every learnable tensor, the optimizer state and the
    /// hyperparameters. Taken between epochs it resumes training exactly.
    pub fn checkpoint(&self) -> Checkpoint {
        let d = self.config.dim;
        let n = self.nodes.len();
        let mut ck = Checkpoint {
            dim: d,
            communities: self.config.communities,
            tensors: Vec::new(),
        };
        let c = &self.config;
        ck.push_real("learning_rate", vec![1], &[c.learning_rate]);
        ck.push_int("batch_size", vec![c.batch_size as u64]);
        ck.push_int("negatives", vec![c.negatives as u64]);
        ck.push_int("epochs", vec![c.epochs as u64]);
        ck.push_int("history_cap", vec![c.history_cap as u64]);
        ck.push_int("seed", vec![c.seed]);
        ck.push_real("time_scale", vec![1], &[self.time_scale]);
        ck.push_real("adam_beta1", vec![1], &[c.adam_beta1]);
        ck.push_real("adam_beta2", vec![1], &[c.adam_beta2]);
        ck.push_real("adam_eps", vec![1], &[c.adam_eps]);
        ck.push_int("epochs_completed", vec![self.epochs_done as u64]);

        let shapes = |i: usize| if i < 4 { vec![d, 3 * d] } else { vec![d] };
        for (i, (name, t)) in AggregatorParams::TENSOR_NAMES
            .iter()
            .zip(self.params.tensors())
            .enumerate()
        {
            ck.push_real(*name, shapes(i), t);
        }
        ck.push_real("omega", vec![d / 2], self.time_encoder.omega());
        ck.push_int("node_ids", self.node_ids.clone());
        let dne: Vec<f64> = self.nodes.iter().map(|s| s.delta_ne).collect();
        let dco: Vec<f64> = self.nodes.iter().map(|s| s.delta_co).collect();
        ck.push_real("delta_ne", vec![n], &dne);
        ck.push_real("delta_co", vec![n], &dco);

        let opt = &self.optimizer;
        for (i, (name, m)) in AggregatorParams::TENSOR_NAMES.iter().zip(&opt.cell).enumerate() {
            ck.push_real(format!("adam.m.{name}"), shapes(i), &m.m);
            ck.push_real(format!("adam.v.{name}"), shapes(i), &m.v);
            ck.push_int(format!("adam.step.{name}"), vec![m.step]);
        }
        ck.push_real("adam.m.omega", vec![d / 2], &opt.omega.m);
        ck.push_real("adam.v.omega", vec![d / 2], &opt.omega.v);
        ck.push_int("adam.step.omega", vec![opt.omega.step]);
        for (name, s) in [("delta_ne", &opt.delta_ne), ("delta_co", &opt.delta_co)] {
            ck.push_real(format!("adam.m.{name}"), vec![n], &s.m);
            ck.push_real(format!("adam.v.{name}"), vec![n], &s.v);
            ck.push_int(format!("adam.step.{name}"), s.steps.clone());
        }
        ck
    }

    /// Rebuilds a trainer for `graph` from a checkpoint.
    ///
    /// Per-node scalars and their optimizer moments are matched by node id;
    /// nodes absent from the checkpoint start fresh.
    pub fn from_checkpoint(graph: &TemporalGraph, ck: &Checkpoint) -> Result<Self> {
        let mut t = Trainer::new(graph, ck.config()?)?;
        for (name, dst) in AggregatorParams::TENSOR_NAMES.iter().zip(t.params.tensors_mut()) {
            copy_into(dst, ck.real(name)?, name)?;
        }
        copy_into(t.time_encoder.omega_mut(), ck.real("omega")?, "omega")?;
        if !crate::math::all_finite(t.time_encoder.omega()) {
            return Err(Error::NonFinite("omega".into()));
        }
        t.epochs_done = ck.int_scalar("epochs_completed")? as usize;

        for (name, m) in AggregatorParams::TENSOR_NAMES.iter().zip(t.optimizer.cell.iter_mut()) {
            restore_moments(m, ck, name)?;
        }
        restore_moments(&mut t.optimizer.omega, ck, "omega")?;

        let ids = ck.int("node_ids")?;
        let dne = ck.real("delta_ne")?;
        let dco = ck.real("delta_co")?;
        if dne.len() != ids.len() || dco.len() != ids.len() {
            return Err(bad("delta tensors do not match node_ids"));
        }
        let scalars = |name: &str| -> Result<(Vec<f64>, Vec<f64>, Vec<u64>)> {
            Ok((
                ck.real(&format!("adam.m.{name}"))?.to_vec(),
                ck.real(&format!("adam.v.{name}"))?.to_vec(),
                ck.int(&format!("adam.step.{name}"))?.to_vec(),
            ))
        };
        let (ne_m, ne_v, ne_s) = scalars("delta_ne")?;
        let (co_m, co_v, co_s) = scalars("delta_co")?;
        for (i, id) in ids.iter().enumerate() {
            let Some(p) = graph.position(*id) else { continue };
            t.nodes[p].delta_ne = dne[i];
            t.nodes[p].delta_co = dco[i];
            set_scalar(&mut t.optimizer.delta_ne, p, (ne_m[i], ne_v[i], ne_s[i]));
            set_scalar(&mut t.optimizer.delta_co, p, (co_m[i], co_v[i], co_s[i]));
        }
        t.reset_stream()?;
        Ok(t)
    }
}

fn restore_moments(m: &mut Moments, ck: &Checkpoint, name: &str) -> Result<()> {
    copy_into(&mut m.m, ck.real(&format!("adam.m.{name}"))?, name)?;
    copy_into(&mut m.v, ck.real(&format!("adam.v.{name}"))?, name)?;
    m.step = ck.int_scalar(&format!("adam.step.{name}"))?;
    Ok(())
}

fn set_scalar(s: &mut ScalarMoments, p: usize, (m, v, step): (f64, f64, u64)) {
    s.m[p] = m;
    s.v[p] = v;
    s.steps[p] = step;
}
