use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use ndarray::Array1;
use sha2::{Digest, Sha256};

use super::cache::DiskCache;
use super::graph::Pipeline;
use super::ops::{Counters, OpContext, State};
use super::params::Binding;
use super::value::{Value, View};
use crate::chemio::Dataset;
use crate::error::{Error, Result};

/// Full-dataset entries shared by every split: precomputed transforms plus
/// memoized split-independent results, keyed by entry digest.
pub struct Stream {
    dataset: Arc<Dataset>,
    salt: String,
    entries: RwLock<HashMap<String, Value>>,
    counters: Arc<Counters>,
}

impl Stream {
    pub fn new(dataset: Arc<Dataset>) -> Stream {
        Stream::with_counters(dataset, Arc::new(Counters::default()))
    }

    pub fn with_counters(dataset: Arc<Dataset>, counters: Arc<Counters>) -> Stream {
        let salt = dataset.content_digest();
        Stream {
            dataset,
            salt,
            entries: RwLock::new(HashMap::new()),
            counters,
        }
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.dataset
    }

    pub fn sample_count(&self) -> usize {
        self.dataset.len()
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    /// Number of entries currently held in memory.
    pub fn entry_count(&self) -> usize {
        self.entries.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    fn get(&self, key: &str) -> Option<Value> {
        self.entries.read().unwrap_or_else(|e| e.into_inner()).get(key).cloned()
    }

    fn insert(&self, key: String, value: Value) {
        self.entries.write().unwrap_or_else(|e| e.into_inner()).insert(key, value);
    }
}

/// Digest of one output channel of a transform.
fn entry_digest(node_digest: &str, channel: &str) -> String {
    let mut h = Sha256::new();
    h.update(node_digest.as_bytes());
    h.update(b".");
    h.update(channel.as_bytes());
    hex::encode(h.finalize())
}

fn name_error(e: Error, node: &str) -> Error {
    match e {
        Error::Transform {
            transform,
            sample,
            source,
        } if transform.is_empty() => Error::Transform {
            transform: node.to_string(),
            sample,
            source,
        },
        e @ Error::Transform { .. } => e,
        other => other.in_transform(node, None),
    }
}

/// What [`precompute`] did per transform.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PrecomputeReport {
    pub computed: Vec<String>,
    pub loaded: Vec<String>,
    pub persisted: usize,
}

/// Runs every precomputable transform once over the full dataset.
///
/// Only frontier entries (consumed by split-dependent or fluid transforms)
/// are kept and persisted; a frontier transform whose entries are all on
/// disk is not evaluated, and neither is anything upstream of it.
pub fn precompute(pipeline: &Pipeline, stream: &Stream, cache: Option<&DiskCache>) -> Result<PrecomputeReport> {
    let digests = pipeline.digests(&stream.salt, &Binding::new());
    let need = pipeline.needed();
    let count = pipeline.nodes.len();
    let pre: Vec<bool> = (0..count).map(|i| need[i] && pipeline.precomputable(i)).collect();

    // frontier channels: consumed by a needed non-precomputable transform, or the output
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new(); count];
    for j in 0..count {
        if need[j] && !pre[j] {
            for &(u, c) in &pipeline.nodes[j].inputs {
                if pre[u] && !frontier[u].contains(&c) {
                    frontier[u].push(c);
                }
            }
        }
    }
    let (out_node, out_channel) = pipeline.output;
    if pre[out_node] && !frontier[out_node].contains(&out_channel) {
        frontier[out_node].push(out_channel);
    }

    let mut report = PrecomputeReport::default();
    let mut local: HashMap<usize, Vec<Value>> = HashMap::new();
    for i in 0..count {
        if frontier[i].is_empty() {
            continue;
        }
        let node = &pipeline.nodes[i];
        let outputs = node.op.outputs();
        let keys: Vec<(usize, String)> = frontier[i]
            .iter()
            .map(|&c| (c, entry_digest(&digests[i], outputs[c].0)))
            .collect();
        if keys.iter().all(|(_, k)| stream.get(k).is_some()) {
            continue;
        }
        if let Some(cache) = cache {
            let mut loaded = Vec::new();
            for (c, k) in &keys {
                match cache.load(k) {
                    Ok(Some((tag, v))) if tag == outputs[*c].1 && v.rows() == Some(stream.sample_count()) => {
                        loaded.push((k.clone(), v))
                    }
                    Ok(_) => break,
                    Err(e) => {
                        log::warn!("ignoring cache entry for '{}': {e}", node.spec.name);
                        break;
                    }
                }
            }
            if loaded.len() == keys.len() {
                for (k, v) in loaded {
                    stream.insert(k, v);
                }
                report.loaded.push(node.spec.name.clone());
                continue;
            }
        }
        let values = evaluate_precomputed(pipeline, stream, i, &mut local, &mut report)?;
        for (c, k) in keys {
            if let Some(cache) = cache {
                if cache.store(&k, outputs[c].1, &values[c])? {
                    report.persisted += 1;
                }
            }
            stream.insert(k, values[c].clone());
        }
    }
    Ok(report)
}

fn evaluate_precomputed(
    pipeline: &Pipeline,
    stream: &Stream,
    i: usize,
    local: &mut HashMap<usize, Vec<Value>>,
    report: &mut PrecomputeReport,
) -> Result<Vec<Value>> {
    if let Some(v) = local.get(&i) {
        return Ok(v.clone());
    }
    let node = &pipeline.nodes[i];
    let mut inputs = Vec::with_capacity(node.inputs.len());
    for &(u, c) in &node.inputs {
        inputs.push(evaluate_precomputed(pipeline, stream, u, local, report)?[c].clone());
    }
    let params = node.spec.params.clone();
    let ctx = OpContext {
        node: &node.spec.name,
        params: &params,
        dataset: &stream.dataset,
        counters: &stream.counters,
    };
    log::debug!("precomputing '{}'", node.spec.name);
    let values = node.op.apply(&ctx, &inputs, None).map_err(|e| name_error(e, &node.spec.name))?;
    report.computed.push(node.spec.name.clone());
    local.insert(i, values.clone());
    Ok(values)
}

/// Fitted states of every stateful transform, with the binding used.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    pub binding: Binding,
    /// `(transform name, state)` in execution order.
    pub states: Vec<(String, State)>,
}

enum Mode<'a> {
    Fit(&'a [usize]),
    Map(&'a FittedPipeline),
}

fn check_binding(pipeline: &Pipeline, binding: &Binding) -> Result<()> {
    let need = pipeline.needed();
    for (i, n) in pipeline.nodes.iter().enumerate() {
        if !need[i] {
            continue;
        }
        for key in n.spec.space.keys() {
            let full = format!("{}.{key}", n.spec.name);
            if !binding.contains_key(&full) {
                return Err(Error::Pipeline(format!("fluid parameter '{full}' is not bound")));
            }
        }
    }
    Ok(())
}

struct Run<'a> {
    pipeline: &'a Pipeline,
    stream: &'a Stream,
    binding: &'a Binding,
    mode: Mode<'a>,
    digests: Vec<String>,
    values: Vec<Option<Vec<Value>>>,
    states: Vec<(String, State)>,
}

impl Run<'_> {
    /// Resolves one output channel, evaluating upstream transforms on demand.
    fn channel(&mut self, i: usize, c: usize) -> Result<Value> {
        if let Some(v) = &self.values[i] {
            return Ok(v[c].clone());
        }
        let node = &self.pipeline.nodes[i];
        if node.split_independent {
            let key = entry_digest(&self.digests[i], node.op.outputs()[c].0);
            if let Some(v) = self.stream.get(&key) {
                return Ok(v);
            }
        }
        let out = self.evaluate(i)?;
        Ok(out[c].clone())
    }

    fn evaluate(&mut self, i: usize) -> Result<Vec<Value>> {
        let pipeline = self.pipeline;
        let node = &pipeline.nodes[i];
        let mut inputs = Vec::with_capacity(node.inputs.len());
        for &(u, c) in &node.inputs {
            inputs.push(self.channel(u, c)?);
        }
        let params = pipeline.bound_params(i, self.binding);
        let ctx = OpContext {
            node: &node.spec.name,
            params: &params,
            dataset: &self.stream.dataset,
            counters: &self.stream.counters,
        };
        let state = if node.op.stateful() {
            let s = match &self.mode {
                Mode::Fit(train) => node.op.fit(&ctx, &inputs, train).map_err(|e| name_error(e, &node.spec.name))?,
                Mode::Map(fitted) => fitted
                    .states
                    .iter()
                    .find(|(n, _)| *n == node.spec.name)
                    .map(|(_, s)| s.clone())
                    .ok_or_else(|| Error::Pipeline(format!("'{}' has not been fitted", node.spec.name)))?,
            };
            Some(s)
        } else {
            None
        };
        let out = node
            .op
            .apply(&ctx, &inputs, state.as_ref())
            .map_err(|e| name_error(e, &node.spec.name))?;
        let outputs = node.op.outputs();
        let n = self.stream.sample_count();
        if let Some((c, v)) = out.iter().enumerate().find(|(_, v)| v.rows().is_some_and(|r| r != n)) {
            return Err(Error::Pipeline(format!(
                "'{}' produced {} rows on channel '{}' for {n} samples",
                node.spec.name,
                v.rows().unwrap_or(0),
                outputs[c].0,
            )));
        }
        if node.split_independent {
            for ((c, _), v) in outputs.iter().zip(&out) {
                self.stream.insert(entry_digest(&self.digests[i], c), v.clone());
            }
        }
        if let Some(s) = state {
            self.states.push((node.spec.name.clone(), s));
        }
        self.values[i] = Some(out.clone());
        Ok(out)
    }
}

type RunOutput = (Array1<f64>, Vec<(String, State)>);

/// Evaluates the output on demand; returns it for every sample, plus fitted states.
fn run(pipeline: &Pipeline, stream: &Stream, binding: &Binding, mode: Mode) -> Result<RunOutput> {
    check_binding(pipeline, binding)?;
    let mut r = Run {
        pipeline,
        stream,
        binding,
        mode,
        digests: pipeline.digests(&stream.salt, binding),
        values: vec![None; pipeline.nodes.len()],
        states: Vec::new(),
    };
    let (o, c) = pipeline.output;
    let out = r.channel(o, c)?.as_vector()?.clone();
    Ok((out, r.states))
}

/// Fits every stateful transform using only the view's training rows.
pub fn fit(pipeline: &Pipeline, stream: &Stream, view: &View, binding: &Binding) -> Result<FittedPipeline> {
    view.check(stream.sample_count())?;
    if view.train.is_empty() {
        return Err(Error::Invalid("cannot fit on an empty training set".into()));
    }
    let (_, states) = run(pipeline, stream, binding, Mode::Fit(&view.train))?;
    Ok(FittedPipeline {
        binding: binding.clone(),
        states,
    })
}

/// Predictions for the view's active rows.
pub fn map(pipeline: &Pipeline, fitted: &FittedPipeline, stream: &Stream, view: &View) -> Result<Array1<f64>> {
    view.check(stream.sample_count())?;
    let (out, _) = run(pipeline, stream, &fitted.binding, Mode::Map(fitted))?;
    Ok(out.select(ndarray::Axis(0), &view.active))
}
