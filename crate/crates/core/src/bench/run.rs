use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use ndarray::Array1;
use rayon::prelude::*;

use super::library::ModelEntry;
use super::records::{sort_records, BenchmarkRecord, Prediction, Status};
use crate::chemio::Dataset;
use crate::error::{Error, Result};
use crate::pipeline::{
    build_pipeline, fit, generate_splits, hyper_search, map, open_split, precompute, Counters, DiskCache, Pipeline,
    PrecomputeReport, SearchSpec, Split, SplitSpec, Stream,
};
use crate::regress::compute_metrics;

#[derive(Debug, Clone, Default)]
pub struct BenchConfig {
    /// Replaces the split specification from the dataset metadata.
    pub split: Option<SplitSpec>,
    /// Replaces the split seed (after `split` is resolved).
    pub seed: Option<u64>,
    pub cache_dir: Option<PathBuf>,
    pub search: SearchSpec,
    /// Record wall-clock seconds per split.
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedModel {
    pub model: String,
    pub reason: String,
}

#[derive(Debug, Default)]
pub struct BenchRun {
    pub records: Vec<BenchmarkRecord>,
    pub skipped: Vec<SkippedModel>,
    pub precompute: Vec<(String, PrecomputeReport)>,
    /// Structure-level descriptor evaluations performed during the run.
    pub descriptor_evaluations: usize,
}

impl BenchConfig {
    pub fn resolve_splits(&self, dataset: &Dataset) -> Result<Vec<Split>> {
        let mut spec = self.split.clone().unwrap_or_else(|| dataset.meta.split.clone());
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        spec.validate()?;
        generate_splits(&spec, dataset.len())
    }
}

/// Evaluates every model on every split. Per-model and per-split failures
/// become failed records; models whose capabilities do not fit the dataset
/// are skipped with a warning.
pub fn run_benchmark(models: &[&ModelEntry], dataset: Arc<Dataset>, config: &BenchConfig) -> Result<BenchRun> {
    let (target, _) = dataset
        .meta
        .primary_target()
        .ok_or_else(|| Error::Schema("dataset declares no target".into()))?;
    let y = dataset.target_values(target)?;
    let splits = config.resolve_splits(&dataset)?;
    let cache = config.cache_dir.as_ref().map(DiskCache::open).transpose()?;
    let counters = Arc::new(Counters::default());
    let split_seed = config.seed.unwrap_or(dataset.meta.split.seed);

    let mut run = BenchRun::default();
    for entry in models {
        if let Some(reason) = entry.incompatibility(&dataset) {
            log::warn!("skipping {}: {reason}", entry.tag);
            run.skipped.push(SkippedModel {
                model: entry.tag.clone(),
                reason,
            });
            continue;
        }
        let stream = Stream::with_counters(dataset.clone(), counters.clone());
        let prepared = build_pipeline(&(entry.factory)(&dataset)).and_then(|p| {
            let report = precompute(&p, &stream, cache.as_ref())?;
            Ok((p, report))
        });
        let (pipeline, report) = match prepared {
            Ok(v) => v,
            Err(e) => {
                log::error!("{} failed: {e}", entry.tag);
                let msg = e.to_string();
                run.records.extend(splits.iter().map(|s| failed_record(entry, s, &msg)));
                continue;
            }
        };
        log::info!(
            "{}: computed {:?}, loaded {:?}",
            entry.tag,
            report.computed,
            report.loaded
        );
        run.precompute.push((entry.tag.clone(), report));
        let ctx = SplitContext {
            entry,
            pipeline: &pipeline,
            stream: &stream,
            dataset: &dataset,
            y: &y,
            config,
        };
        let records: Vec<BenchmarkRecord> = splits
            .par_iter()
            .enumerate()
            .map(|(i, split)| {
                let start = Instant::now();
                let seed = split_seed ^ ((i as u64 + 1) << 32);
                let mut rec = ctx.evaluate(split, seed).unwrap_or_else(|e| {
                    log::error!("{} on {} failed: {e}", entry.tag, split.tag);
                    failed_record(entry, split, &e.to_string())
                });
                if config.timing {
                    rec.seconds = Some(start.elapsed().as_secs_f64());
                }
                rec
            })
            .collect();
        run.records.extend(records);
    }
    sort_records(&mut run.records);
    run.descriptor_evaluations = counters.descriptor_evaluations();
    Ok(run)
}

struct SplitContext<'a> {
    entry: &'a ModelEntry,
    pipeline: &'a Pipeline,
    stream: &'a Stream,
    dataset: &'a Dataset,
    y: &'a Array1<f64>,
    config: &'a BenchConfig,
}

impl SplitContext<'_> {
    fn evaluate(&self, split: &Split, seed: u64) -> Result<BenchmarkRecord> {
        let n = self.dataset.len();
        let task = self.dataset.meta.task;
        let (train_view, test_view) = open_split(split, n)?;
        let search = hyper_search(
            self.pipeline,
            self.stream,
            self.y.view(),
            &split.train,
            &self.config.search,
            task,
            seed,
        )?;
        let fitted = fit(self.pipeline, self.stream, &train_view, &search.best)?;
        let yhat = map(self.pipeline, &fitted, self.stream, &test_view)?;
        let y_test: Vec<f64> = split.test.iter().map(|&i| self.y[i]).collect();
        let metrics = compute_metrics(yhat.as_slice().expect("contiguous"), &y_test, task)?;
        Ok(BenchmarkRecord {
            model: self.entry.tag.clone(),
            family: self.entry.family.clone(),
            split: split.tag.clone(),
            fraction: split.fraction(),
            n_train: split.train.len(),
            hyper: search.best,
            metrics: metrics.to_map(),
            pred: split
                .test
                .iter()
                .zip(yhat.iter())
                .map(|(&id, &p)| Prediction {
                    id,
                    y: self.y[id],
                    yhat: p,
                })
                .collect(),
            status: Status::Ok,
            seconds: None,
            error: None,
        })
    }
}

fn failed_record(entry: &ModelEntry, split: &Split, message: &str) -> BenchmarkRecord {
    BenchmarkRecord {
        model: entry.tag.clone(),
        family: entry.family.clone(),
        split: split.tag.clone(),
        fraction: split.fraction(),
        n_train: split.train.len(),
        hyper: Default::default(),
        metrics: Default::default(),
        pred: Vec::new(),
        status: Status::Failed,
        seconds: None,
        error: Some(message.to_string()),
    }
}
