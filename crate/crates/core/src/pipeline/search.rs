use ndarray::{Array1, ArrayView1};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exec::{fit, map, Stream};
use super::graph::Pipeline;
use super::params::Binding;
use super::split::{nested_fold_count, nested_folds};
use super::value::View;
use crate::chemio::Task;
use crate::error::{Error, Result};
use crate::regress::roc_auc;
use crate::rng::stream_rng;

const SEARCH_STREAM: u64 = 0x7365_6172;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchSpec {
    /// Full Cartesian product of the search space.
    #[default]
    Grid,
    /// `n` candidates drawn without replacement from the grid.
    Random { n: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    pub binding: Binding,
    pub fold_scores: Vec<f64>,
    /// Mean validation RMSE (regression) or ROC-AUC (classification).
    pub score: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: Binding,
    pub best_index: usize,
    pub score: f64,
    pub folds: usize,
    pub table: Vec<CandidateScore>,
}

/// Candidate bindings in enumeration order: grid order is lexicographic over
/// the search space (last parameter fastest); random search shuffles it.
pub fn candidates(pipeline: &Pipeline, spec: &SearchSpec) -> Vec<Binding> {
    let space = pipeline.search_space();
    let mut out = vec![Binding::new()];
    for (key, values) in &space {
        out = out
            .into_iter()
            .flat_map(|b| {
                values.iter().map(move |v| {
                    let mut b = b.clone();
                    b.insert(key.clone(), v.clone());
                    b
                })
            })
            .collect();
    }
    if let SearchSpec::Random { n, seed } = spec {
        out.shuffle(&mut stream_rng(*seed, SEARCH_STREAM));
        out.truncate(*n);
    }
    out
}

fn fold_score(pred: &Array1<f64>, truth: &Array1<f64>, task: Task) -> f64 {
    match task {
        Task::Regression => {
            let mse = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / pred.len() as f64;
            mse.sqrt()
        }
        Task::Classification => {
            let top = truth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let positive: Vec<bool> = truth.iter().map(|&t| t == top).collect();
            roc_auc(pred.as_slice().expect("contiguous"), &positive)
        }
    }
}

fn mean_ignoring_nan(v: &[f64]) -> f64 {
    let finite: Vec<f64> = v.iter().copied().filter(|x| !x.is_nan()).collect();
    if finite.is_empty() {
        f64::NAN
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    }
}

/// Whether `a` beats `b` (strictly); NaN never wins.
fn better(a: f64, b: f64, task: Task) -> bool {
    match (a.is_nan(), b.is_nan()) {
        (true, _) => false,
        (false, true) => true,
        _ => match task {
            Task::Regression => a < b,
            Task::Classification => a > b,
        },
    }
}

/// Nested k-fold validation of every candidate inside `train` only.
pub fn hyper_search(
    pipeline: &Pipeline,
    stream: &Stream,
    y: ArrayView1<f64>,
    train: &[usize],
    spec: &SearchSpec,
    task: Task,
    seed: u64,
) -> Result<SearchResult> {
    let cands = candidates(pipeline, spec);
    if cands.is_empty() {
        return Err(Error::Invalid("search produced no candidates".into()));
    }
    let k = nested_fold_count(train.len());
    if k < 2 {
        if cands.len() == 1 {
            let best = cands[0].clone();
            return Ok(SearchResult {
                best: best.clone(),
                best_index: 0,
                score: f64::NAN,
                folds: 0,
                table: vec![CandidateScore {
                    binding: best,
                    fold_scores: Vec::new(),
                    score: f64::NAN,
                    error: None,
                }],
            });
        }
        return Err(Error::Invalid(format!(
            "training set of {} samples is too small for nested validation",
            train.len()
        )));
    }
    let folds = nested_folds(train, k, seed);
    let table: Vec<CandidateScore> = cands
        .into_par_iter()
        .map(|binding| {
            let mut scores = Vec::with_capacity(folds.len());
            for (fit_idx, val_idx) in &folds {
                let outcome = fit(pipeline, stream, &View::train(fit_idx), &binding)
                    .and_then(|f| map(pipeline, &f, stream, &View::test(val_idx, fit_idx)));
                match outcome {
                    Ok(pred) => {
                        let truth = Array1::from_iter(val_idx.iter().map(|&i| y[i]));
                        scores.push(fold_score(&pred, &truth, task));
                    }
                    Err(e) => {
                        return CandidateScore {
                            binding,
                            fold_scores: scores,
                            score: f64::NAN,
                            error: Some(e.to_string()),
                        }
                    }
                }
            }
            let score = mean_ignoring_nan(&scores);
            CandidateScore {
                binding,
                fold_scores: scores,
                score,
                error: None,
            }
        })
        .collect();

    if table.iter().all(|c| c.error.is_some()) {
        let log: Vec<String> = table
            .iter()
            .map(|c| format!("{:?}: {}", c.binding, c.error.as_deref().unwrap_or("")))
            .collect();
        return Err(Error::Numerical(format!("all candidates failed:\n{}", log.join("\n"))));
    }
    let mut best_index = table.iter().position(|c| c.error.is_none()).expect("one candidate succeeded");
    for (i, c) in table.iter().enumerate() {
        if c.error.is_none() && better(c.score, table[best_index].score, task) {
            best_index = i;
        }
    }
    Ok(SearchResult {
        best: table[best_index].binding.clone(),
        best_index,
        score: table[best_index].score,
        folds: k,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_loses_and_first_wins_ties() {
        assert!(!better(f64::NAN, 1.0, Task::Regression));
        assert!(better(1.0, f64::NAN, Task::Regression));
        assert!(!better(1.0, 1.0, Task::Regression));
        assert!(better(0.9, 0.8, Task::Classification));
    }

    #[test]
    fn nan_mean() {
        assert_eq!(mean_ignoring_nan(&[1.0, f64::NAN, 3.0]), 2.0);
        assert!(mean_ignoring_nan(&[f64::NAN]).is_nan());
    }
}
