use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub fn accuracy(truth: &[i64], predicted: &[i64]) -> Result<f64> {
    check(truth, predicted)?;
    let hits = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Per-class F1 averaged with weights proportional to true-class support.
pub fn weighted_f1(truth: &[i64], predicted: &[i64]) -> Result<f64> {
    check(truth, predicted)?;
    // (support, predicted count, true positives)
    let mut counts: BTreeMap<i64, (usize, usize, usize)> = BTreeMap::new();
    for (&t, &p) in truth.iter().zip(predicted) {
        counts.entry(t).or_default().0 += 1;
        counts.entry(p).or_default().1 += 1;
        if t == p {
            counts.entry(t).or_default().2 += 1;
        }
    }
    let n = truth.len() as f64;
    Ok(counts
        .values()
        .filter(|c| c.0 > 0)
        .map(|&(support, pred, tp)| {
            let f1 = if tp == 0 {
                0.0
            } else {
                2.0 * tp as f64 / (support + pred) as f64
            };
            support as f64 / n * f1
        })
        .sum())
}

fn check(truth: &[i64], predicted: &[i64]) -> Result<()> {
    if truth.is_empty() {
        return Err(Error::Contract("metrics need at least one prediction".into()));
    }
    if truth.len() != predicted.len() {
        return Err(Error::dim("predicted labels", truth.len(), predicted.len()));
    }
    Ok(())
}
