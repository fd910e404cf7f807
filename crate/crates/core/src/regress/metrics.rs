use std::collections::BTreeMap;

use crate::chemio::Task;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Error and ranking statistics for one prediction vector.
///
/// Undefined statistics are NaN and listed in `flags`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub n: usize,
    pub rmse: f64,
    pub mae: f64,
    pub r2: f64,
    pub spearman: f64,
    pub roc_auc: Option<f64>,
    pub flags: Vec<String>,
}

impl MetricReport {
    /// Fixed metric names used in result records.
    pub fn to_map(&self) -> BTreeMap<String, Option<f64>> {
        let finite = |x: f64| x.is_finite().then_some(x);
        let mut m = BTreeMap::new();
        m.insert("rmse".to_string(), finite(self.rmse));
        m.insert("mae".to_string(), finite(self.mae));
        m.insert("r2".to_string(), finite(self.r2));
        m.insert("spearman".to_string(), finite(self.spearman));
        if let Some(auc) = self.roc_auc {
            m.insert("roc_auc".to_string(), finite(auc));
        }
        m
    }

    pub fn from_map(n: usize, m: &BTreeMap<String, Option<f64>>) -> MetricReport {
        let get = |k: &str| m.get(k).copied().flatten().unwrap_or(f64::NAN);
        let mut flags = Vec::new();
        for k in ["r2", "spearman"] {
            if m.get(k).is_some_and(|v| v.is_none()) {
                flags.push(format!("{k}_undefined"));
            }
        }
        MetricReport {
            n,
            rmse: get("rmse"),
            mae: get("mae"),
            r2: get("r2"),
            spearman: get("spearman"),
            roc_auc: m.contains_key("roc_auc").then(|| get("roc_auc")),
            flags,
        }
    }
}

/// Average (fractional) ranks, 1-based; ties share the mean of their positions.
pub fn rank_average(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation; NaN when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return f64::NAN;
    }
    (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)
}

/// Spearman's rank correlation (Pearson on average ranks).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spearman: length mismatch");
    pearson(&rank_average(a), &rank_average(b))
}

/// ROC-AUC as the Mann–Whitney statistic; tied scores count ½.
/// NaN when only one class is present.
pub fn roc_auc(scores: &[f64], positive: &[bool]) -> f64 {
    let ranks = rank_average(scores);
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return f64::NAN;
    }
    let rank_sum: f64 = ranks.iter().zip(positive).filter(|(_, &p)| p).map(|(r, _)| r).sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    u / (n_pos * n_neg) as f64
}

pub fn compute_metrics<T: Scalar>(y_pred: &[T], y_true: &[T], task: Task) -> Result<MetricReport> {
    if y_pred.len() != y_true.len() {
        return Err(Error::Invalid(format!(
            "metrics: {} predictions for {} targets",
            y_pred.len(),
            y_true.len()
        )));
    }
    if y_pred.len() < 2 {
        return Err(Error::Invalid("metrics need at least two samples".into()));
    }
    let p: Vec<f64> = y_pred.iter().map(|v| v.to_f64_lossy()).collect();
    let t: Vec<f64> = y_true.iter().map(|v| v.to_f64_lossy()).collect();
    let n = p.len();
    let nf = n as f64;
    let mut flags = Vec::new();

    let (mut se, mut ae) = (0.0, 0.0);
    for (a, b) in p.iter().zip(&t) {
        se += (a - b) * (a - b);
        ae += (a - b).abs();
    }
    let rmse = (se / nf).sqrt();
    let mae = ae / nf;
    let mean_t = t.iter().sum::<f64>() / nf;
    let ss_tot: f64 = t.iter().map(|v| (v - mean_t) * (v - mean_t)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - se / ss_tot
    } else {
        flags.push("r2_undefined".to_string());
        f64::NAN
    };
    let rho = spearman(&p, &t);
    if rho.is_nan() {
        flags.push("spearman_undefined".to_string());
    }
    let roc = match task {
        Task::Regression => None,
        Task::Classification => {
            let top = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let positive: Vec<bool> = t.iter().map(|v| *v == top).collect();
            let auc = roc_auc(&p, &positive);
            if auc.is_nan() {
                flags.push("roc_auc_undefined".to_string());
            }
            Some(auc)
        }
    };
    Ok(MetricReport {
        n,
        rmse,
        mae,
        r2,
        spearman: rho,
        roc_auc: roc,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let y = [1.0, 2.0, 3.5, -1.0];
        let m = compute_metrics(&y, &y, Task::Regression).unwrap();
        assert_eq!(m.rmse, 0.0);
        assert_eq!(m.mae, 0.0);
        assert_eq!(m.r2, 1.0);
        assert!((m.spearman - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reversed_ranks() {
        let t = [1.0, 2.0, 3.0, 4.0, 5.0];
        let p = [50.0, 40.0, 30.0, 20.0, 10.0];
        let m = compute_metrics(&p, &t, Task::Regression).unwrap();
        assert!((m.spearman + 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_truth_flags_undefined() {
        let m = compute_metrics(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0], Task::Regression).unwrap();
        assert!(m.r2.is_nan() && m.spearman.is_nan());
        assert_eq!(m.flags, vec!["r2_undefined", "spearman_undefined"]);
        assert_eq!(m.to_map()["r2"], None);
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(rank_average(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
    }

    #[test]
    fn auc_limits() {
        let labels = [false, false, false, true, true, true];
        assert_eq!(roc_auc(&[0.1, 0.2, 0.3, 0.7, 0.8, 0.9], &labels), 1.0);
        assert_eq!(roc_auc(&[0.5; 6], &labels), 0.5);
        assert!(roc_auc(&[0.1, 0.2], &[true, true]).is_nan());
    }

    #[test]
    fn classification_report_has_auc() {
        let m = compute_metrics(&[0.9, 0.1, 0.8, 0.3], &[1.0, 0.0, 1.0, 0.0], Task::Classification).unwrap();
        assert_eq!(m.roc_auc, Some(1.0));
        assert!(m.to_map().contains_key("roc_auc"));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(compute_metrics(&[1.0, 2.0], &[1.0], Task::Regression).is_err());
        assert!(compute_metrics(&[1.0], &[1.0], Task::Regression).is_err());
    }
}
