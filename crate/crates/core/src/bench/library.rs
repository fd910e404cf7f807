use std::sync::Arc;

use regex::Regex;
use serde_json::Value as Json;

use crate::chemio::Dataset;
use crate::error::{Error, Result};
use crate::pipeline::{NodeSpec, PipelineSpec};
use crate::regress::{lambda_grid, NU_CANDIDATES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capability {
    /// Needs atomic coordinates.
    Coordinates,
    /// Accepts periodic structures.
    PeriodicOk,
    /// Rejects any periodic structure.
    NonperiodicOnly,
    /// Needs precomputed feature columns.
    Features,
}

pub type PipelineFactory = Arc<dyn Fn(&Dataset) -> PipelineSpec + Send + Sync>;

#[derive(Clone)]
pub struct ModelEntry {
    pub tag: String,
    pub family: String,
    pub requires: Vec<Capability>,
    pub factory: PipelineFactory,
}

impl std::fmt::Debug for ModelEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelEntry")
            .field("tag", &self.tag)
            .field("family", &self.family)
            .field("requires", &self.requires)
            .finish()
    }
}

impl ModelEntry {
    /// Reason the model cannot run on `dataset`, if any.
    pub fn incompatibility(&self, dataset: &Dataset) -> Option<String> {
        let periodic = dataset.structures.iter().any(|s| s.is_periodic());
        for cap in &self.requires {
            match cap {
                Capability::Coordinates if !dataset.has_geometry() => {
                    return Some("requires atomic coordinates".into())
                }
                Capability::NonperiodicOnly if periodic => return Some("defined for non-periodic structures only".into()),
                Capability::Features if dataset.meta.features.is_empty() => {
                    return Some("requires precomputed feature columns".into())
                }
                _ => {}
            }
        }
        if periodic && !self.requires.contains(&Capability::PeriodicOk) {
            return Some("does not support periodic structures".into());
        }
        None
    }
}

/// Ordered registry of benchmarkable models.
#[derive(Debug, Clone, Default)]
pub struct ModelLibrary {
    entries: Vec<ModelEntry>,
}

impl ModelLibrary {
    pub fn new() -> ModelLibrary {
        ModelLibrary::default()
    }

    pub fn register(&mut self, entry: ModelEntry) -> Result<()> {
        let pattern = Regex::new("^[a-z0-9_.-]+$").expect("static pattern");
        if !pattern.is_match(&entry.tag) {
            return Err(Error::Invalid(format!("invalid model tag '{}'", entry.tag)));
        }
        if self.entries.iter().any(|e| e.tag == entry.tag) {
            return Err(Error::Invalid(format!("model tag '{}' already registered", entry.tag)));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[ModelEntry] {
        &self.entries
    }

    pub fn get(&self, tag: &str) -> Option<&ModelEntry> {
        self.entries.iter().find(|e| e.tag == tag)
    }

    /// Entries whose tag matches `pattern` (unanchored search), in registration order.
    pub fn select(&self, pattern: &str) -> Result<Vec<&ModelEntry>> {
        let re = Regex::new(pattern)?;
        let out: Vec<&ModelEntry> = self.entries.iter().filter(|e| re.is_match(&e.tag)).collect();
        if out.is_empty() {
            log::warn!("no model matches '{pattern}'");
        }
        Ok(out)
    }

    /// The built-in model set.
    pub fn standard() -> ModelLibrary {
        use Capability::*;
        let mut lib = ModelLibrary::new();
        let mut add = |tag: &str, family: &str, requires: Vec<Capability>, descriptor: Descriptor, regressor: Regressor| {
            let factory: PipelineFactory = Arc::new(move |d: &Dataset| model_spec(d, &descriptor, regressor));
            lib.register(ModelEntry {
                tag: tag.into(),
                family: family.into(),
                requires,
                factory,
            })
            .expect("built-in tags are valid and unique");
        };
        let molecular = || vec![Coordinates, NonperiodicOnly];
        let geometric = || vec![Coordinates, PeriodicOk];
        let soap = |heuristic: &str, pooling: &str, cross: bool| Descriptor::Soap {
            heuristic: heuristic.into(),
            pooling: pooling.into(),
            cross,
        };
        add("cm_sorted_rr", "cm", molecular(), Descriptor::Coulomb("sorted_l2"), Regressor::Ridge);
        add("cm_sorted_krr", "cm", molecular(), Descriptor::Coulomb("sorted_l2"), Regressor::Krr);
        add("cm_spectral_krr", "cm", molecular(), Descriptor::Coulomb("spectral"), Regressor::Krr);
        add("acsf_int_rr", "acsf", geometric(), Descriptor::Acsf, Regressor::Ridge);
        add("acsf_int_krr", "acsf", geometric(), Descriptor::Acsf, Regressor::Krr);
        add("soap-s_int_krr", "soap", geometric(), soap("standard", "intensive", true), Regressor::Krr);
        add("soap-l_int_krr", "soap", geometric(), soap("longrange", "intensive", true), Regressor::Krr);
        add("soap-min_int_krr", "soap", geometric(), soap("minimal", "intensive", true), Regressor::Krr);
        add("soap_ext_rr", "soap", geometric(), soap("standard", "extensive", true), Regressor::Ridge);
        add("soap_nocross_int_krr", "soap", geometric(), soap("standard", "intensive", false), Regressor::Krr);
        add("pdf-soap_krr", "pdf-soap", geometric(), Descriptor::SoapPdf, Regressor::Krr);
        add("feat_rr", "feat", vec![Features, PeriodicOk], Descriptor::Features, Regressor::Ridge);
        add("feat_krr", "feat", vec![Features, PeriodicOk], Descriptor::Features, Regressor::Krr);
        lib
    }
}

#[derive(Debug, Clone)]
enum Descriptor {
    Coulomb(&'static str),
    Acsf,
    Soap { heuristic: String, pooling: String, cross: bool },
    SoapPdf,
    Features,
}

#[derive(Debug, Clone, Copy)]
enum Regressor {
    Ridge,
    Krr,
}

fn model_spec(dataset: &Dataset, descriptor: &Descriptor, regressor: Regressor) -> PipelineSpec {
    let scaling = dataset
        .meta
        .primary_target()
        .map(|(_, t)| t.scaling.as_str())
        .unwrap_or("unknown");
    let mut nodes = vec![NodeSpec::new("input", "input")];
    let x_ref = match descriptor {
        Descriptor::Coulomb(reduction) => {
            nodes.push(NodeSpec::new("descriptor", "coulomb").param("reduction", *reduction).input("dataset", "input.dataset"));
            "descriptor.X"
        }
        Descriptor::Features => {
            nodes.push(NodeSpec::new("descriptor", "features").input("dataset", "input.dataset"));
            "descriptor.X"
        }
        Descriptor::SoapPdf => {
            nodes.push(NodeSpec::new("descriptor", "soap_pdf").param("heuristic", "standard").input("dataset", "input.dataset"));
            "descriptor.X"
        }
        Descriptor::Acsf => {
            nodes.push(NodeSpec::new("descriptor", "acsf").input("dataset", "input.dataset"));
            nodes.push(NodeSpec::new("pool", "pool").param("mode", "intensive").input("atoms", "descriptor.atoms"));
            "pool.X"
        }
        Descriptor::Soap { heuristic, pooling, cross } => {
            nodes.push(
                NodeSpec::new("descriptor", "soap")
                    .param("heuristic", heuristic.as_str())
                    .param("cross", *cross)
                    .input("dataset", "input.dataset"),
            );
            nodes.push(NodeSpec::new("pool", "pool").param("mode", pooling.as_str()).input("atoms", "descriptor.atoms"));
            "pool.X"
        }
    };
    let lambdas: Vec<Json> = lambda_grid().into_iter().map(Json::from).collect();
    match regressor {
        Regressor::Ridge => nodes.push(
            NodeSpec::new("ridge", "ridge")
                .input("X", x_ref)
                .input("y", "input.y")
                .input("sizes", "input.sizes")
                .param("scaling", scaling)
                .space("lambda", lambdas),
        ),
        Regressor::Krr => {
            nodes.push(NodeSpec::new("normalize", "normalize").input("X", x_ref));
            nodes.push(NodeSpec::new("kernel", "kernel").input("X", "normalize.X").space("nu", NU_CANDIDATES));
            nodes.push(
                NodeSpec::new("krr", "krr")
                    .input("K", "kernel.K")
                    .input("y", "input.y")
                    .input("sizes", "input.sizes")
                    .param("scaling", scaling)
                    .space("lambda", lambdas),
            );
        }
    }
    let output = match regressor {
        Regressor::Ridge => "ridge.yhat",
        Regressor::Krr => "krr.yhat",
    };
    PipelineSpec {
        nodes,
        output: output.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regex_selection() {
        let lib = ModelLibrary::standard();
        let tags = |p: &str| lib.select(p).unwrap().iter().map(|e| e.tag.clone()).collect::<Vec<_>>();
        assert_eq!(tags("acsf.*"), vec!["acsf_int_rr", "acsf_int_krr"]);
        assert_eq!(tags(".*").len(), lib.entries().len());
        assert!(tags("^$").is_empty());
        assert!(lib.select("(").is_err());
    }

    #[test]
    fn select_keeps_registration_order() {
        let mut lib = ModelLibrary::new();
        let std = ModelLibrary::standard();
        lib.register(std.get("soap-l_int_krr").unwrap().clone()).unwrap();
        lib.register(std.get("acsf_int_rr").unwrap().clone()).unwrap();
        let picked: Vec<_> = lib.select("acsf.*").unwrap().iter().map(|e| e.tag.as_str()).collect();
        assert_eq!(picked, vec!["acsf_int_rr"]);
        assert!(lib.register(std.get("acsf_int_rr").unwrap().clone()).is_err());
    }

    #[test]
    fn invalid_tags_rejected() {
        let mut lib = ModelLibrary::new();
        let mut e = ModelLibrary::standard().get("cm_sorted_rr").unwrap().clone();
        e.tag = "CM Sorted".into();
        assert!(lib.register(e).is_err());
    }

    #[test]
    fn every_builtin_pipeline_builds() {
        let s = crate::chemio::Structure::molecule(
            vec![crate::chemio::Element::from_symbol("H").unwrap()],
            vec![[0.0; 3]],
        )
        .unwrap()
        .with_property("E", crate::chemio::Property::Number(1.0));
        let meta = crate::chemio::generate_metadata(std::slice::from_ref(&s), "t", "t.xyz").unwrap();
        let d = Dataset::new(vec![s], meta).unwrap();
        for e in ModelLibrary::standard().entries() {
            crate::pipeline::build_pipeline(&(e.factory)(&d)).unwrap_or_else(|err| panic!("{}: {err}", e.tag));
        }
    }
}
