use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array2, ArrayView2};
use rand::seq::index::sample;

use crate::bench::BenchmarkRecord;
use crate::error::{Error, Result};
use crate::regress::{pearson, rank_average};
use crate::rng::stream_rng;

const SAMPLE_STREAM: u64 = 0x616e_616c;

/// Pairwise Spearman coefficients between labelled vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityKernel {
    pub labels: Vec<String>,
    pub k: Array2<f64>,
    /// Labels whose row and column are NaN, with the reason.
    pub flags: Vec<String>,
}

impl SimilarityKernel {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Drops every flagged label (NaN diagonal); returns the reduced kernel
    /// and the dropped labels.
    pub fn finite_part(&self) -> (SimilarityKernel, Vec<String>) {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.k[[i, i]].is_finite()).collect();
        let dropped = (0..self.len())
            .filter(|i| !keep.contains(i))
            .map(|i| self.labels[i].clone())
            .collect();
        let k = Array2::from_shape_fn((keep.len(), keep.len()), |(a, b)| self.k[[keep[a], keep[b]]]);
        let kernel = SimilarityKernel {
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
            k,
            flags: Vec::new(),
        };
        (kernel, dropped)
    }
}

fn spearman_kernel(labels: Vec<String>, vectors: &[Vec<f64>], what: &str) -> SimilarityKernel {
    let m = labels.len();
    let degenerate: Vec<bool> = vectors
        .iter()
        .map(|v| v.iter().all(|&x| x == v[0]) || v.iter().any(|x| !x.is_finite()))
        .collect();
    let ranks: Vec<Vec<f64>> = vectors.iter().map(|v| rank_average(v)).collect();
    let mut k = Array2::from_elem((m, m), f64::NAN);
    for a in 0..m {
        if degenerate[a] {
            continue;
        }
        k[[a, a]] = 1.0;
        for b in (a + 1)..m {
            if degenerate[b] {
                continue;
            }
            let r = if ranks[a] == ranks[b] {
                1.0
            } else {
                pearson(&ranks[a], &ranks[b]).clamp(-1.0, 1.0)
            };
            k[[a, b]] = r;
            k[[b, a]] = r;
        }
    }
    let flags = labels
        .iter()
        .zip(&degenerate)
        .filter(|(_, &d)| d)
        .map(|(l, _)| format!("{l}: {what}"))
        .collect();
    SimilarityKernel { labels, k, flags }
}

/// Spearman correlation between the prediction vectors of each pair of models.
pub fn model_similarity(predictions: &[(String, Vec<f64>)]) -> Result<SimilarityKernel> {
    let len = predictions.first().map(|p| p.1.len()).unwrap_or(0);
    if predictions.iter().any(|p| p.1.len() != len) {
        return Err(Error::Invalid("prediction vectors differ in length".into()));
    }
    if len < 3 {
        return Err(Error::Invalid(format!("need at least 3 shared samples, got {len}")));
    }
    let labels = predictions.iter().map(|p| p.0.clone()).collect();
    let vectors: Vec<Vec<f64>> = predictions.iter().map(|p| p.1.clone()).collect();
    Ok(spearman_kernel(labels, &vectors, "constant predictions"))
}

/// Strict upper triangle of Φ Φᵀ in row-major order.
pub fn flattened_kernel(phi: ArrayView2<f64>) -> Vec<f64> {
    let k = phi.dot(&phi.t());
    let m = k.nrows();
    let mut out = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in (i + 1)..m {
            out.push(k[[i, j]]);
        }
    }
    out
}

/// Spearman correlation between the linear kernels the representations
/// induce on a shared set of samples.
pub fn descriptor_similarity(representations: &[(String, Array2<f64>)]) -> Result<SimilarityKernel> {
    let m = representations.first().map(|r| r.1.nrows()).unwrap_or(0);
    if representations.iter().any(|r| r.1.nrows() != m) {
        return Err(Error::Invalid("representations differ in sample count".into()));
    }
    if m < 3 {
        return Err(Error::Invalid(format!("need at least 3 samples, got {m}")));
    }
    let labels = representations.iter().map(|r| r.0.clone()).collect();
    let vectors: Vec<Vec<f64>> = representations.iter().map(|r| flattened_kernel(r.1.view())).collect();
    Ok(spearman_kernel(labels, &vectors, "zero-variance kernel"))
}

/// `m` distinct indices from `0..n`, ascending, drawn from the seeded generator.
pub fn sample_indices(n: usize, m: usize, seed: u64) -> Result<Vec<usize>> {
    if m > n {
        return Err(Error::Invalid(format!("cannot draw {m} samples from {n}")));
    }
    let mut rng = stream_rng(seed, SAMPLE_STREAM);
    let mut idx = sample(&mut rng, n, m).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Per-model prediction vectors over the test samples every model covers.
///
/// Predictions for a sample that is tested on several splits are averaged.
/// Models without successful records are left out. Vectors are ordered by
/// sample id; the ids are returned alongside.
pub fn prediction_table(records: &[BenchmarkRecord]) -> (Vec<usize>, Vec<(String, Vec<f64>)>) {
    let mut per_model: BTreeMap<&str, BTreeMap<usize, (f64, usize)>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_ok()) {
        let entry = per_model.entry(&r.model).or_default();
        for p in &r.pred {
            let slot = entry.entry(p.id).or_insert((0.0, 0));
            slot.0 += p.yhat;
            slot.1 += 1;
        }
    }
    let mut shared: Option<BTreeSet<usize>> = None;
    for preds in per_model.values() {
        let ids: BTreeSet<usize> = preds.keys().copied().collect();
        shared = Some(match shared {
            None => ids,
            Some(s) => s.intersection(&ids).copied().collect(),
        });
    }
    let ids: Vec<usize> = shared.unwrap_or_default().into_iter().collect();
    let table = per_model
        .into_iter()
        .map(|(model, preds)| {
            let v = ids
                .iter()
                .map(|id| {
                    let (sum, n) = preds[id];
                    sum / n as f64
                })
                .collect();
            (model.to_string(), v)
        })
        .collect();
    (ids, table)
}
