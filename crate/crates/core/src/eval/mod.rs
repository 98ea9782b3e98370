//! Node-classification evaluation: stratified k-fold cross-validation of a
//! multinomial logistic regression on the learned embeddings, reporting
//! accuracy and support-weighted F1.

mod export;
mod logreg;
mod metrics;
mod synth;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use export::{export_embeddings, Embeddings};
pub use logreg::{ClassifierModel, LogRegConfig};
pub use metrics::{accuracy, weighted_f1};
pub use synth::{synth_planted_graph, PlantedGraph};

use crate::error::{Error, Result};
use crate::ingest::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub fold_accuracy: Vec<f64>,
    pub fold_weighted_f1: Vec<f64>,
    pub seed: u64,
}

impl EvalReport {
    pub fn folds(&self) -> usize {
        self.fold_accuracy.len()
    }

    /// `key value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "accuracy {}", self.accuracy);
        let _ = writeln!(out, "weighted_f1 {}", self.weighted_f1);
        let _ = writeln!(out, "folds {}", self.folds());
        let _ = writeln!(out, "seed {}", self.seed);
        for (i, (a, f)) in self.fold_accuracy.iter().zip(&self.fold_weighted_f1).enumerate() {
            let _ = writeln!(out, "fold_{}_accuracy {a}", i + 1);
            let _ = writeln!(out, "fold_{}_weighted_f1 {f}", i + 1);
        }
        out
    }
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin,
/// continuing where the previous class stopped so fold sizes stay level.
pub fn stratified_folds(labels: &[(NodeId, i64)], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    let mut by_class: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &(_, l)) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut offset = 0;
    for (&class, members) in &mut by_class {
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                class,
                count: members.len(),
                folds: k,
            });
        }
        members.shuffle(&mut rng);
        for (j, &i) in members.iter().enumerate() {
            folds[i] = (offset + j) % k;
        }
        offset += members.len();
    }
    Ok(folds)
}

/// k-fold cross-validated logistic-regression classification.
///
/// Every labeled node must have an embedding; the first ten offenders are
/// reported otherwise.
pub fn kfold_classify(
    embeddings: &Embeddings,
    labels: &BTreeMap<NodeId, i64>,
    k: usize,
    seed: u64,
) -> Result<EvalReport> {
    kfold_classify_with(embeddings, labels, k, seed, &LogRegConfig::default())
}

pub fn kfold_classify_with(
    embeddings: &Embeddings,
    labels: &BTreeMap<NodeId, i64>,
    k: usize,
    seed: u64,
    config: &LogRegConfig,
) -> Result<EvalReport> {
    let missing: Vec<NodeId> = labels
        .keys()
        .filter(|id| embeddings.get(**id).is_none())
        .take(10)
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingEmbeddings(missing));
    }
    let rows: Vec<(NodeId, i64)> = labels.iter().map(|(&id, &l)| (id, l)).collect();
    let folds = stratified_folds(&rows, k, seed)?;

    let mut fold_accuracy = Vec::with_capacity(k);
    let mut fold_weighted_f1 = Vec::with_capacity(k);
    for fold in 0..k {
        let (mut train_x, mut train_y, mut test_x, mut test_y) = (vec![], vec![], vec![], vec![]);
        for ((id, label), &f) in rows.iter().zip(&folds) {
            let x = embeddings.get(*id).expect("checked above");
            if f == fold {
                test_x.push(x);
                test_y.push(*label);
            } else {
                train_x.push(x);
                train_y.push(*label);
            }
        }
        let model = ClassifierModel::fit(&train_x, &train_y, config)?;
        let predicted: Vec<i64> = test_x.iter().map(|x| model.predict(x)).collect();
        fold_accuracy.push(accuracy(&test_y, &predicted)?);
        fold_weighted_f1.push(weighted_f1(&test_y, &predicted)?);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(EvalReport {
        accuracy: mean(&fold_accuracy),
        weighted_f1: mean(&fold_weighted_f1),
        fold_accuracy,
        fold_weighted_f1,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn clouds(n: usize, seed: u64, separation: f64) -> (Embeddings, BTreeMap<NodeId, i64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids = vec![];
        let mut vecs = vec![];
        let mut labels = BTreeMap::new();
        for i in 0..n {
            let class = (i % 2) as i64;
            let c = if class == 0 { -separation } else { separation };
            ids.push(i as NodeId);
            vecs.push((0..4).map(|_| c + rng.random_range(-1.0..1.0)).collect());
            labels.insert(i as NodeId, class);
        }
        (Embeddings::new(ids, vecs).unwrap(), labels)
    }

    #[test]
    fn separable_clouds_score_perfectly() {
        let (e, l) = clouds(60, 1, 3.0);
        let r = kfold_classify(&e, &l, 5, 0).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.weighted_f1, 1.0);
        assert_eq!(r.folds(), 5);
    }

    #[test]
    fn random_labels_hover_at_chance() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let ids: Vec<NodeId> = (0..1000).collect();
        let vecs: Vec<Vec<f64>> = (0..1000)
            .map(|_| (0..8).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let mut order: Vec<usize> = (0..1000).collect();
        order.shuffle(&mut rng);
        let labels = order.iter().enumerate().map(|(i, &j)| (j as NodeId, (i % 2) as i64)).collect();
        let e = Embeddings::new(ids, vecs).unwrap();
        let r = kfold_classify(&e, &labels, 5, 3).unwrap();
        assert!((r.accuracy - 0.5).abs() <= 0.05, "{}", r.accuracy);
    }

    #[test]
    fn folds_partition_and_stratify() {
        let rows: Vec<(NodeId, i64)> = (0..83).map(|i| (i, (i % 3) as i64 + 3 * (i / 50) as i64)).collect();
        let folds = stratified_folds(&rows, 5, 9).unwrap();
        let mut per: BTreeMap<(i64, usize), usize> = BTreeMap::new();
        for ((_, l), f) in rows.iter().zip(&folds) {
            *per.entry((*l, *f)).or_default() += 1;
        }
        let classes: std::collections::BTreeSet<i64> = rows.iter().map(|r| r.1).collect();
        for c in classes {
            let sizes: Vec<usize> = (0..5).map(|f| per.get(&(c, f)).copied().unwrap_or(0)).collect();
            assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1, "{sizes:?}");
        }
    }

    #[test]
    fn errors_name_class_and_offenders() {
        let (e, mut l) = clouds(20, 2, 3.0);
        l.insert(500, 7);
        l.insert(501, 7);
        match kfold_classify(&e, &l, 5, 0) {
            Err(Error::MissingEmbeddings(ids)) => assert_eq!(ids, vec![500, 501]),
            other => panic!("{other:?}"),
        }
        let (e, mut l) = clouds(20, 2, 3.0);
        l.insert(3, 9);
        match kfold_classify(&e, &l, 5, 0) {
            Err(Error::ClassTooSmall { class: 9, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn deterministic_and_serialized() {
        let (e, l) = clouds(40, 4, 0.3);
        let a = kfold_classify(&e, &l, 4, 11).unwrap();
        let b = kfold_classify(&e, &l, 4, 11).unwrap();
        assert_eq!(a, b);
        let text = a.to_text();
        assert!(text.starts_with(&format!("accuracy {}\nweighted_f1 {}\n", a.accuracy, a.weighted_f1)));
        assert!(text.contains("fold_4_weighted_f1 "));
    }
}
