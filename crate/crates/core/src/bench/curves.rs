use std::collections::BTreeMap;

use super::records::BenchmarkRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub n_train: usize,
    /// Mean test RMSE over repeats.
    pub mean: f64,
    /// Population standard deviation over repeats.
    pub std: f64,
    pub repeats: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub model: String,
    pub family: String,
    pub points: Vec<CurvePoint>,
    /// Slope of log10(RMSE) against log10(N); NaN with fewer than two usable points.
    pub learning_rate: f64,
}

impl LearningCurve {
    pub fn final_rmse(&self) -> Option<f64> {
        self.points.last().map(|p| p.mean)
    }
}

/// Groups successful records by model and training-set size.
pub fn assemble_learning_curves(records: &[BenchmarkRecord]) -> Vec<LearningCurve> {
    let mut groups: BTreeMap<&str, (&str, BTreeMap<usize, Vec<f64>>)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_ok()) {
        let Some(rmse) = r.metric("rmse") else { continue };
        let entry = groups.entry(&r.model).or_insert((&r.family, BTreeMap::new()));
        entry.1.entry(r.n_train).or_default().push(rmse);
    }
    groups
        .into_iter()
        .map(|(model, (family, by_n))| {
            let points: Vec<CurvePoint> = by_n
                .into_iter()
                .map(|(n_train, v)| {
                    let mean = v.iter().sum::<f64>() / v.len() as f64;
                    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
                    CurvePoint {
                        n_train,
                        mean,
                        std: var.sqrt(),
                        repeats: v.len(),
                    }
                })
                .collect();
            let learning_rate = log_log_slope(&points);
            LearningCurve {
                model: model.to_string(),
                family: family.to_string(),
                points,
                learning_rate,
            }
        })
        .collect()
}

fn log_log_slope(points: &[CurvePoint]) -> f64 {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.mean > 0.0 && p.mean.is_finite() && p.n_train > 0)
        .map(|p| ((p.n_train as f64).log10(), p.mean.log10()))
        .collect();
    if xy.len() < 2 {
        return f64::NAN;
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return f64::NAN;
    }
    sxy / sxx
}

/// For each family, the curve with the lowest RMSE at its largest training size.
pub fn best_per_family(curves: &[LearningCurve]) -> Vec<&LearningCurve> {
    let mut best: BTreeMap<&str, &LearningCurve> = BTreeMap::new();
    for c in curves {
        let Some(score) = c.final_rmse() else { continue };
        match best.get(c.family.as_str()) {
            Some(b) if b.final_rmse().unwrap_or(f64::INFINITY) <= score => {}
            _ => {
                best.insert(&c.family, c);
            }
        }
    }
    best.into_values().collect()
}
