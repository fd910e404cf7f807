//! Transform implementations available to declarative pipelines.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use ndarray::{concatenate, Array1, Array2, Axis};
use rayon::prelude::*;

use super::params::{ParamReader, Params};
use super::value::{AtomRows, DataTag, Object, Value, View};
use crate::chemio::{Dataset, Element, Scaling, Structure};
use crate::descriptors::{
    acsf_structure, coulomb_descriptor, l2_rows, length_scale_heuristic, pair_spectrum, pool_extensive,
    pool_intensive, pool_intensive_per_element, soap_power_spectrum, AcsfConfig, CoulombConfig, CoulombReduction,
    HeuristicVariant, LengthScaleTable, Soap, SoapConfig, Whitener,
};
use crate::error::{Error, Result};
use crate::regress::{kernel_dot, krr_fit, ridge_fit, scale_target, Direction, KrrModel, RidgeModel};

/// Instrumentation shared by every transform of a run.
#[derive(Debug, Default)]
pub struct Counters {
    descriptor_evaluations: AtomicUsize,
}

impl Counters {
    pub fn descriptor_evaluations(&self) -> usize {
        self.descriptor_evaluations.load(Ordering::Relaxed)
    }

    fn add_descriptor_evaluations(&self, n: usize) {
        self.descriptor_evaluations.fetch_add(n, Ordering::Relaxed);
    }
}

pub struct OpContext<'a> {
    pub node: &'a str,
    pub params: &'a Params,
    pub dataset: &'a Arc<Dataset>,
    pub counters: &'a Counters,
}

impl<'a> OpContext<'a> {
    pub fn reader(&self) -> ParamReader<'a> {
        ParamReader {
            node: self.node,
            params: self.params,
        }
    }
}

/// Fitted payload of a stateful transform.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Ridge { model: RidgeModel<f64>, scaling: Scaling },
    /// `train` holds the kernel columns the dual coefficients refer to.
    Krr {
        model: KrrModel<f64>,
        scaling: Scaling,
        train: Vec<usize>,
    },
    Whiten(Whitener<f64>),
}

pub type Channels = &'static [(&'static str, DataTag)];

pub trait Operator: Send + Sync {
    fn inputs(&self) -> Channels;
    fn outputs(&self) -> Channels;
    /// Accepted parameter names.
    fn params(&self) -> &'static [&'static str];

    fn stateful(&self) -> bool {
        false
    }

    /// Whether results may be computed once over the whole dataset and reused.
    fn precomputable(&self) -> bool {
        !self.stateful()
    }

    fn fit(&self, _ctx: &OpContext, _inputs: &[Value], _train: &[usize]) -> Result<State> {
        Err(Error::Pipeline("transform has no fit step".into()))
    }

    /// Produces outputs for every sample of the stream.
    fn apply(&self, ctx: &OpContext, inputs: &[Value], state: Option<&State>) -> Result<Vec<Value>>;
}

pub fn operator(name: &str) -> Result<Box<dyn Operator>> {
    Ok(match name {
        "input" => Box::new(Input),
        "features" => Box::new(Features),
        "coulomb" => Box::new(Coulomb),
        "soap" => Box::new(SoapOp),
        "soap_pdf" => Box::new(SoapPdf),
        "acsf" => Box::new(Acsf),
        "pool" => Box::new(Pool),
        "normalize" => Box::new(Normalize),
        "whiten" => Box::new(Whiten),
        "kernel" => Box::new(Kernel),
        "ridge" => Box::new(Ridge),
        "krr" => Box::new(Krr),
        other => return Err(Error::Pipeline(format!("unknown transform type '{other}'"))),
    })
}

fn at_sample(e: Error, i: usize) -> Error {
    Error::Transform {
        transform: String::new(),
        sample: Some(i),
        source: Box::new(e),
    }
}

/// Maps `f` over structures in parallel; the first failing index is reported.
fn per_structure<T: Send>(
    ctx: &OpContext,
    f: impl Fn(&Structure) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    let structures = &ctx.dataset.structures;
    let results: Vec<Result<T>> = structures.par_iter().map(&f).collect();
    ctx.counters.add_descriptor_evaluations(structures.len());
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| at_sample(e, i)))
        .collect()
}

fn stack_rows(rows: Vec<Array1<f64>>) -> Result<Array2<f64>> {
    let views: Vec<_> = rows.iter().map(|r| r.view().insert_axis(Axis(0))).collect();
    if views.is_empty() {
        return Err(Error::Invalid("no rows to stack".into()));
    }
    concatenate(Axis(0), &views).map_err(|e| Error::Invalid(format!("inconsistent row widths: {e}")))
}

fn dataset_of(inputs: &[Value]) -> Result<&Arc<Dataset>> {
    match inputs[0].as_object()? {
        Object::Dataset(d) => Ok(d),
        _ => Err(Error::Pipeline("expected a dataset object".into())),
    }
}

fn sorted_elements(d: &Dataset) -> Vec<Element> {
    let mut e: Vec<Element> = d.meta.elements.iter().copied().filter(|e| !e.is_dummy()).collect();
    for s in &d.structures {
        e.extend(s.elements.iter().copied().filter(|e| !e.is_dummy()));
    }
    e.sort();
    e.dedup();
    e
}

fn parse_scaling(r: &ParamReader) -> Result<Scaling> {
    Scaling::parse(r.str_or("scaling", "unknown")?)
}

const DATASET: (&str, DataTag) = ("dataset", DataTag::Object);

struct Input;

impl Operator for Input {
    fn inputs(&self) -> Channels {
        &[]
    }
    fn outputs(&self) -> Channels {
        &[DATASET, ("y", DataTag::Vector), ("sizes", DataTag::Vector)]
    }
    fn params(&self) -> &'static [&'static str] {
        &["target", "dataset_digest"]
    }
    fn apply(&self, ctx: &OpContext, _inputs: &[Value], _state: Option<&State>) -> Result<Vec<Value>> {
        let d = ctx.dataset;
        let target = match ctx.params.get("target").and_then(|v| v.as_str()) {
            Some(t) => t.to_string(),
            None => d
                .meta
                .primary_target()
                .map(|(t, _)| t.to_string())
                .ok_or_else(|| Error::Schema("dataset declares no target".into()))?,
        };
        Ok(vec![
            Value::object(Object::Dataset(d.clone())),
            Value::vector(d.target_values(&target)?),
            Value::vector(d.sizes()),
        ])
    }
}

struct Features;

impl Operator for Features {
    fn inputs(&self) -> Channels {
        &[DATASET]
    }
    fn outputs(&self) -> Channels {
        &[("X", DataTag::DesignMatrix)]
    }
    fn params(&self) -> &'static [&'static str] {
        &[]
    }
    fn apply(&self, ctx: &OpContext, inputs: &[Value], _state: Option<&State>) -> Result<Vec<Value>> {
        let d = dataset_of(inputs)?;
        ctx.counters.add_descriptor_evaluations(d.len());
        Ok(vec![Value::matrix(d.feature_matrix()?)])
    }
}

struct Coulomb;

impl Operator for Coulomb {
    fn inputs(&self) -> Channels {
        &[DATASET]
    }
    fn outputs(&self) -> Channels {
        &[("X", DataTag::DesignMatrix)]
    }
    fn params(&self) -> &'static [&'static str] {
        &["max_atoms", "reduction"]
    }
    fn apply(&self, ctx: &OpContext, inputs: &[Value], _state: Option<&State>) -> Result<Vec<Value>> {
        let d = dataset_of(inputs)?;
        let r = ctx.reader();
        let largest = d.structures.iter().map(Structure::len).max().unwrap_or(0);
        let reduction = match r.str_or("reduction", "sorted_l2")? {
            "sorted_l2" => CoulombReduction::SortedL2,
            "spectral" => CoulombReduction::Spectral,
            other => return Err(Error::Pipeline(format!("{}: unknown reduction '{other}'", ctx.node))),
        };
        let config = CoulombConfig {
            max_atoms: r.usize_or("max_atoms", largest)?,
            reduction,
        };
        let rows = per_structure(ctx, |s| coulomb_descriptor::<f64>(s, &config))?;
        Ok(vec![Value::matrix(stack_rows(rows)?)])
    }
}

/// SOAP configurations from explicit parameters or a length-scale heuristic.
fn soap_configs(ctx: &OpContext, d: &Dataset) -> Result<Vec<SoapConfig>> {
    let r = ctx.reader();
    let elements = sorted_elements(d);
    let mut configs = if let Some(r_cut) = r.f64_opt("r_cut")? {
        vec![SoapConfig::new(r_cut, 8, 4, &elements)]
    } else {
        let variant = match r.str_or("heuristic", "standard")? {
            "standard" => HeuristicVariant::Standard,
            "longrange" => HeuristicVariant::Longrange,
            "minimal" => HeuristicVariant::Minimal,
            other => return Err(Error::Pipeline(format!("{}: unknown heuristic '{other}'", ctx.node))),
        };
        length_scale_heuristic(&elements, &LengthScaleTable::default(), variant)?
    };
    for c in configs.iter_mut() {
        if let Some(n) = r.usize_opt("n_max")? {
            c.n_max = n;
        }
        if let Some(l) = r.usize_opt("l_max")? {
            c.l_max = l;
        }
        if let Some(s) = r.f64_opt("sigma")? {
            c.sigma = s;
        }
        c.cross_channels = r.bool_or("cross", true)?;
    }
    Ok(configs)
}

const SOAP_PARAMS: &[&str] = &["heuristic", "r_cut", "n_max", "l_max", "sigma", "cross", "normalize"];

struct SoapOp;

impl Operator for SoapOp {
    fn inputs(&self) -> Channels {
        &[DATASET]
    }
    fn outputs(&self) -> Channels {
        &[("atoms", DataTag::Object)]
    }
    fn params(&self) -> &'static [&'static str] {
        SOAP_PARAMS
    }
    fn apply(&self, ctx: &OpContext, inputs: &[Value], _state: Option<&State>) -> Result<Vec<Value>> {
        let d = dataset_of(inputs)?;
        let configs = soap_configs(ctx, d)?;
        let normalize = ctx.reader().bool_or("normalize", true)?;
        let soaps = configs.into_iter().map(Soap::<f64>::new).collect::<Result<Vec<_>>>()?;
        let items = per_structure(ctx, |s| {
            let mut blocks = Vec::with_capacity(soaps.len());
            for soap in &soaps {
                let p = soap_power_spectrum(&soap.expand(s)?, soap.config.cross_channels);
                blocks.push(if normalize { l2_rows(p.view()) } else { p });
            }
            let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
            let rows = concatenate(Axis(1), &views).map_err(|e| Error::Invalid(e.to_string()))?;
            Ok((s.elements.clone(), rows))
        })?;
        Ok(vec![Value::object(Object::Atoms(AtomRows {
            elements: sorted_elements(d),
            items,
        }))])
    }
}

struct SoapPdf;

impl Operator for SoapPdf {
    fn inputs(&self) -> Channels {
        &[DATASET]
    }
    fn outputs(&self) -> Channels {
        &[("X", DataTag::DesignMatrix)]
    }
    fn params(&self) -> &'static [&'static str] {
        &["heuristic", "r_cut", "n_max", "l_max", "sigma", "cross"]
    }
    fn apply(&self, ctx: &OpContext, inputs: &[Value], _state: Option<&State>) -> Result<Vec<Value>> {
        let d = dataset_of(inputs)?;
        let soaps = soap_configs(ctx, d)?
            .into_iter()
            .map(Soap::<f64>::new)
            .collect::<Result<Vec<_>>>()?;
        let rows = per_structure(ctx, |s| {
            let mut parts = Vec::new();
            for soap in &soaps {
                parts.extend(pair_spectrum(&soap.expand(s)?, soap.config.cross_channels)?);
            }
            Ok(Array1::from_vec(parts))
        })?;
        Ok(vec![Value::matrix(stack_rows(rows)?)])
    }
}

struct Acsf;

impl Operator for Acsf {
    fn inputs(&self) -> Channels {
        &[DATASET]
    }
    fn outputs(&self) -> Channels {
        &[("atoms", DataTag::Object)]
    }
    fn params(&self) -> &'static [&'static str] {
        &["r_cut"]
    }
    fn apply(&self, ctx: &OpContext, inputs: &[Value], _state: Option<&State>) -> Result<Vec<Value>> {
        let d = dataset_of(inputs)?;
        let elements = sorted_elements(d);
        let r_cut = match ctx.reader().f64_opt("r_cut")? {
            Some(r) => r,
            None => {
                let configs =
                    length_scale_heuristic(&elements, &LengthScaleTable::default(), HeuristicVariant::Standard)?;
                configs[1].r_cut
            }
        };
        let config = AcsfConfig::uniform(r_cut, &elements);
        let items = per_structure(ctx, |s| Ok((s.elements.clone(), acsf_structure::<f64>(s, &config)?)))?;
        Ok(vec![Value::object(Object::Atoms(AtomRows { elements, items }))])
    }
}

struct Pool;

impl Operator for Pool {
    fn inputs(&self) -> Channels {
        &[("atoms", DataTag::Object)]
    }
    fn outputs(&self) -> Channels {
        &[("X", DataTag::DesignMatrix)]
    }
    fn params(&self) -> &'static [&'static str] {
        &["mode"]
    }
    fn apply(&self, ctx: &OpContext, inputs: &[Value], _state: Option<&State>) -> Result<Vec<Value>> {
        let atoms = match inputs[0].as_object()? {
            Object::Atoms(a) => a,
            _ => return Err(Error::Pipeline("pool expects per-atom rows".into())),
        };
        let mode = ctx.reader().str_or("mode", "intensive")?;
        let pooled: Vec<Result<Array1<f64>>> = atoms
            .items
            .iter()
            .map(|(labels, m)| match mode {
                "intensive" => pool_intensive(m.view()),
                "extensive" => pool_extensive(m.view()),
                "per_element" => pool_intensive_per_element(m.view(), labels, &atoms.elements),
                other => Err(Error::Pipeline(format!("unknown pooling mode '{other}'"))),
            })
            .collect();
        let rows = pooled
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.map_err(|e| at_sample(e, i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(vec![Value::matrix(stack_rows(rows)?)])
    }
}

struct Normalize;

impl Operator for Normalize {
    fn inputs(&self) -> Channels {
        &[("X", DataTag::DesignMatrix)]
    }
    fn outputs(&self) -> Channels {
        &[("X", DataTag::DesignMatrix)]
    }
    fn params(&self) -> &'static [&'static str] {
        &[]
    }
    fn apply(&self, _ctx: &OpContext, inputs: &[Value], _state: Option<&State>) -> Result<Vec<Value>> {
        Ok(vec![Value::matrix(l2_rows(inputs[0].as_matrix()?.view()))])
    }
}

struct Whiten;

impl Operator for Whiten {
    fn inputs(&self) -> Channels {
        &[("X", DataTag::DesignMatrix)]
    }
    fn outputs(&self) -> Channels {
        &[("X", DataTag::DesignMatrix)]
    }
    fn params(&self) -> &'static [&'static str] {
        &[]
    }
    fn stateful(&self) -> bool {
        true
    }
    fn fit(&self, _ctx: &OpContext, inputs: &[Value], train: &[usize]) -> Result<State> {
        let x = View::train(train).slice(DataTag::DesignMatrix, &inputs[0])?;
        Ok(State::Whiten(Whitener::fit(x.as_matrix()?.view())?))
    }
    fn apply(&self, _ctx: &OpContext, inputs: &[Value], state: Option<&State>) -> Result<Vec<Value>> {
        match state {
            Some(State::Whiten(w)) => Ok(vec![Value::matrix(w.transform(inputs[0].as_matrix()?.view())?)]),
            _ => Err(Error::Pipeline("whiten used before fit".into())),
        }
    }
}

struct Kernel;

impl Operator for Kernel {
    fn inputs(&self) -> Channels {
        &[("X", DataTag::DesignMatrix)]
    }
    fn outputs(&self) -> Channels {
        &[("K", DataTag::KernelMatrix)]
    }
    fn params(&self) -> &'static [&'static str] {
        &["nu"]
    }
    fn apply(&self, ctx: &OpContext, inputs: &[Value], _state: Option<&State>) -> Result<Vec<Value>> {
        let nu = ctx.reader().usize_or("nu", 1)?;
        if nu == 0 {
            return Err(Error::Pipeline(format!("{}: nu must be at least 1", ctx.node)));
        }
        let x = inputs[0].as_matrix()?;
        Ok(vec![Value::matrix(kernel_dot(x.view(), x.view(), nu as u32)?)])
    }
}

const REGRESSOR_OUT: Channels = &[("yhat", DataTag::Vector)];

fn scaled_train_targets(ctx: &OpContext, inputs: &[Value], train: &[usize]) -> Result<(Array1<f64>, Scaling)> {
    let view = View::train(train);
    let y = view.slice(DataTag::Vector, &inputs[1])?;
    let sizes = view.slice(DataTag::Vector, &inputs[2])?;
    let scaling = parse_scaling(&ctx.reader())?;
    let y = scale_target(y.as_vector()?.view(), sizes.as_vector()?.view(), scaling, Direction::Forward)?;
    Ok((y, scaling))
}

fn lambda(ctx: &OpContext) -> Result<f64> {
    let l = ctx.reader().f64("lambda")?;
    if !(l > 0.0) {
        return Err(Error::Pipeline(format!("{}: lambda must be positive", ctx.node)));
    }
    Ok(l)
}

struct Ridge;

impl Operator for Ridge {
    fn inputs(&self) -> Channels {
        &[("X", DataTag::DesignMatrix), ("y", DataTag::Vector), ("sizes", DataTag::Vector)]
    }
    fn outputs(&self) -> Channels {
        REGRESSOR_OUT
    }
    fn params(&self) -> &'static [&'static str] {
        &["lambda", "scaling"]
    }
    fn stateful(&self) -> bool {
        true
    }
    fn fit(&self, ctx: &OpContext, inputs: &[Value], train: &[usize]) -> Result<State> {
        let x = View::train(train).slice(DataTag::DesignMatrix, &inputs[0])?;
        let (y, scaling) = scaled_train_targets(ctx, inputs, train)?;
        let model = ridge_fit(x.as_matrix()?.view(), y.view(), lambda(ctx)?)?;
        Ok(State::Ridge { model, scaling })
    }
    fn apply(&self, _ctx: &OpContext, inputs: &[Value], state: Option<&State>) -> Result<Vec<Value>> {
        let Some(State::Ridge { model, scaling }) = state else {
            return Err(Error::Pipeline("ridge used before fit".into()));
        };
        let raw = model.predict(inputs[0].as_matrix()?.view())?;
        let y = scale_target(raw.view(), inputs[2].as_vector()?.view(), *scaling, Direction::Inverse)?;
        Ok(vec![Value::vector(y)])
    }
}

struct Krr;

impl Operator for Krr {
    fn inputs(&self) -> Channels {
        &[("K", DataTag::KernelMatrix), ("y", DataTag::Vector), ("sizes", DataTag::Vector)]
    }
    fn outputs(&self) -> Channels {
        REGRESSOR_OUT
    }
    fn params(&self) -> &'static [&'static str] {
        &["lambda", "scaling"]
    }
    fn stateful(&self) -> bool {
        true
    }
    fn fit(&self, ctx: &OpContext, inputs: &[Value], train: &[usize]) -> Result<State> {
        let k = View::train(train).slice(DataTag::KernelMatrix, &inputs[0])?;
        let (y, scaling) = scaled_train_targets(ctx, inputs, train)?;
        let model = krr_fit(k.as_matrix()?.view(), y.view(), lambda(ctx)?)?;
        Ok(State::Krr {
            model,
            scaling,
            train: train.to_vec(),
        })
    }
    fn apply(&self, _ctx: &OpContext, inputs: &[Value], state: Option<&State>) -> Result<Vec<Value>> {
        let Some(State::Krr { model, scaling, train }) = state else {
            return Err(Error::Pipeline("krr used before fit".into()));
        };
        let k = inputs[0].as_matrix()?;
        let raw = model.predict(k.select(Axis(1), train).view())?;
        let y = scale_target(raw.view(), inputs[2].as_vector()?.view(), *scaling, Direction::Inverse)?;
        Ok(vec![Value::vector(y)])
    }
}
