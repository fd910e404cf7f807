use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};

use super::{Element, Structure};
use crate::error::{Error, Result};
use crate::pipeline::{Repeats, SplitKind, SplitSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scaling {
    /// Extensive: grows with the number of atoms.
    Additive,
    Intensive,
    #[default]
    Unknown,
}

impl Scaling {
    pub fn as_str(self) -> &'static str {
        match self {
            Scaling::Additive => "additive",
            Scaling::Intensive => "intensive",
            Scaling::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Result<Scaling> {
        match s {
            "additive" => Ok(Scaling::Additive),
            "intensive" => Ok(Scaling::Intensive),
            "unknown" => Ok(Scaling::Unknown),
            other => Err(Error::Schema(format!(
                "unknown scaling '{other}' (expected additive, intensive or unknown)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TargetSpec {
    pub scaling: Scaling,
    pub units: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Task {
    #[default]
    Regression,
    Classification,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Regression => "regression",
            Task::Classification => "classification",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub name: String,
    pub source_path: String,
    pub elements: Vec<Element>,
    pub targets: BTreeMap<String, TargetSpec>,
    pub task: Task,
    pub split: SplitSpec,
    pub smiles_amenable: bool,
    /// Property names holding precomputed features (descriptor bypass).
    pub features: Vec<String>,
}

impl DatasetMeta {
    pub fn new(name: &str, source_path: &str) -> DatasetMeta {
        DatasetMeta {
            name: name.to_string(),
            source_path: source_path.to_string(),
            elements: Vec::new(),
            targets: BTreeMap::new(),
            task: Task::Regression,
            split: SplitSpec::default(),
            smiles_amenable: false,
            features: Vec::new(),
        }
    }

    /// The first declared target in name order.
    pub fn primary_target(&self) -> Option<(&str, &TargetSpec)> {
        self.targets.iter().next().map(|(k, v)| (k.as_str(), v))
    }

    pub fn to_json(&self) -> Value {
        let targets: Map<String, Value> = self
            .targets
            .iter()
            .map(|(name, t)| {
                let mut spec = Map::new();
                spec.insert("scaling".into(), json!(t.scaling.as_str()));
                if let Some(u) = &t.units {
                    spec.insert("units".into(), json!(u));
                }
                (name.clone(), Value::Object(spec))
            })
            .collect();
        let mut out = Map::new();
        out.insert("name".into(), json!(self.name));
        out.insert("source_path".into(), json!(self.source_path));
        out.insert(
            "elements".into(),
            json!(self.elements.iter().map(|e| e.symbol()).collect::<Vec<_>>()),
        );
        out.insert("targets".into(), Value::Object(targets));
        out.insert("task".into(), json!(self.task.as_str()));
        out.insert("split".into(), split_to_json(&self.split));
        out.insert("smiles_amenable".into(), json!(self.smiles_amenable));
        if !self.features.is_empty() {
            out.insert("features".into(), json!(self.features));
        }
        Value::Object(out)
    }

    /// Pretty-printed JSON with sorted keys and a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("metadata serializes");
        s.push('\n');
        s
    }
}

fn split_to_json(split: &SplitSpec) -> Value {
    let mut out = Map::new();
    out.insert("type".into(), json!(split.kind.as_str()));
    match split.kind {
        SplitKind::KFold => {
            out.insert("k".into(), json!(split.folds));
        }
        _ => {
            out.insert("fractions".into(), json!(split.fractions));
        }
    }
    out.insert(
        "n_repeats".into(),
        match split.n_repeats {
            Repeats::Auto => json!("auto"),
            Repeats::Fixed(n) => json!(n),
        },
    );
    out.insert("seed".into(), json!(split.seed));
    Value::Object(out)
}

const KNOWN_KEYS: [&str; 9] = [
    "name",
    "source_path",
    "elements",
    "targets",
    "task",
    "split",
    "smiles_amenable",
    "features",
    "description",
];

/// Parses dataset metadata; unknown keys are logged and ignored.
pub fn parse_metadata(json_text: &str) -> Result<DatasetMeta> {
    parse_metadata_with_warnings(json_text).map(|(meta, _)| meta)
}

/// Like [`parse_metadata`], also returning the warnings that were logged.
pub fn parse_metadata_with_warnings(json_text: &str) -> Result<(DatasetMeta, Vec<String>)> {
    let root: Value = serde_json::from_str(json_text)?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::Schema("metadata must be a JSON object".into()))?;
    let mut warnings = Vec::new();
    for key in obj.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            let w = format!("ignoring unknown metadata key '{key}'");
            log::warn!("{w}");
            warnings.push(w);
        }
    }
    let required_str = |field: &str| -> Result<String> {
        match obj.get(field) {
            None => Err(Error::Schema(format!("missing required field '{field}'"))),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(Error::Schema(format!("field '{field}' must be a string"))),
        }
    };
    let mut meta = DatasetMeta::new(&required_str("name")?, &required_str("source_path")?);

    let targets = obj
        .get("targets")
        .ok_or_else(|| Error::Schema("missing required field 'targets'".into()))?;
    meta.targets = parse_targets(targets)?;

    if let Some(v) = obj.get("elements") {
        let list = v
            .as_array()
            .ok_or_else(|| Error::Schema("field 'elements' must be a list of symbols".into()))?;
        for item in list {
            let sym = item
                .as_str()
                .ok_or_else(|| Error::Schema("field 'elements' must be a list of symbols".into()))?;
            let e = Element::from_symbol(sym)
                .ok_or_else(|| Error::Schema(format!("unknown element symbol '{sym}' in 'elements'")))?;
            meta.elements.push(e);
        }
    }
    if let Some(v) = obj.get("task") {
        meta.task = match v.as_str() {
            Some("regression") => Task::Regression,
            Some("classification") => Task::Classification,
            _ => return Err(Error::Schema(format!("field 'task' must be regression or classification, got {v}"))),
        };
    }
    if let Some(v) = obj.get("split") {
        meta.split = parse_split(v, &mut warnings)?;
    }
    if let Some(v) = obj.get("smiles_amenable") {
        meta.smiles_amenable = v
            .as_bool()
            .ok_or_else(|| Error::Schema("field 'smiles_amenable' must be a boolean".into()))?;
    }
    if let Some(v) = obj.get("features") {
        let list = v.as_array().ok_or_else(|| Error::Schema("field 'features' must be a list".into()))?;
        meta.features = list
            .iter()
            .map(|f| {
                f.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| Error::Schema("field 'features' must contain strings".into()))
            })
            .collect::<Result<_>>()?;
    }
    Ok((meta, warnings))
}

fn parse_targets(v: &Value) -> Result<BTreeMap<String, TargetSpec>> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Schema("field 'targets' must be an object".into()))?;
    if obj.is_empty() {
        return Err(Error::Schema("field 'targets' declares no targets".into()));
    }
    let mut out = BTreeMap::new();
    for (name, spec) in obj {
        let mut t = TargetSpec::default();
        match spec {
            Value::Object(fields) => {
                if let Some(s) = fields.get("scaling") {
                    let s = s
                        .as_str()
                        .ok_or_else(|| Error::Schema(format!("target '{name}': scaling must be a string")))?;
                    t.scaling = Scaling::parse(s)?;
                }
                if let Some(u) = fields.get("units") {
                    t.units = Some(
                        u.as_str()
                            .ok_or_else(|| Error::Schema(format!("target '{name}': units must be a string")))?
                            .to_string(),
                    );
                }
            }
            Value::Null => {}
            _ => return Err(Error::Schema(format!("target '{name}' must be an object"))),
        }
        out.insert(name.clone(), t);
    }
    Ok(out)
}

fn parse_split(v: &Value, warnings: &mut Vec<String>) -> Result<SplitSpec> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Schema("field 'split' must be an object".into()))?;
    let kind = match obj.get("type").and_then(Value::as_str) {
        Some("random") => SplitKind::Random,
        Some("sequential") | None => SplitKind::Sequential,
        Some("kfold") => SplitKind::KFold,
        Some(other) => return Err(Error::Schema(format!("unknown split type '{other}'"))),
    };
    let mut spec = SplitSpec::for_kind(kind);
    for key in obj.keys() {
        if !["type", "fractions", "n_repeats", "seed", "k"].contains(&key.as_str()) {
            let w = format!("ignoring unknown split key '{key}'");
            log::warn!("{w}");
            warnings.push(w);
        }
    }
    if let Some(f) = obj.get("fractions") {
        let list = f
            .as_array()
            .ok_or_else(|| Error::Schema("split 'fractions' must be a list of numbers".into()))?;
        spec.fractions = list
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| Error::Schema("split 'fractions' must be numbers".into())))
            .collect::<Result<_>>()?;
    }
    if let Some(r) = obj.get("n_repeats") {
        spec.n_repeats = match r {
            Value::String(s) if s == "auto" => Repeats::Auto,
            Value::Number(n) => Repeats::Fixed(
                n.as_u64()
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| Error::Schema("split 'n_repeats' must be a positive integer or \"auto\"".into()))?
                    as usize,
            ),
            _ => return Err(Error::Schema("split 'n_repeats' must be a positive integer or \"auto\"".into())),
        };
    }
    if let Some(s) = obj.get("seed") {
        spec.seed = s
            .as_u64()
            .ok_or_else(|| Error::Schema("split 'seed' must be a non-negative integer".into()))?;
    }
    if let Some(k) = obj.get("k") {
        spec.folds = k
            .as_u64()
            .ok_or_else(|| Error::Schema("split 'k' must be an integer".into()))? as usize;
    }
    spec.validate().map_err(|e| Error::Schema(e.to_string()))?;
    Ok(spec)
}

/// Proposes metadata for a set of structures: observed elements (alphabetical),
/// numeric properties common to every structure as targets, default splits.
///
/// Properties prefixed `feature.` are treated as precomputed features rather
/// than targets.
pub fn generate_metadata(structures: &[Structure], name: &str, source_path: &str) -> Result<DatasetMeta> {
    if structures.is_empty() {
        return Err(Error::Invalid("cannot generate metadata for an empty dataset".into()));
    }
    let mut meta = DatasetMeta::new(name, source_path);
    let mut elements: BTreeSet<Element> = BTreeSet::new();
    for s in structures {
        elements.extend(s.elements.iter().copied().filter(|e| !e.is_dummy()));
    }
    let mut elements: Vec<Element> = elements.into_iter().collect();
    elements.sort_by(|a, b| a.symbol().cmp(b.symbol()));
    meta.elements = elements;

    let numeric_keys = |s: &Structure| -> BTreeSet<String> {
        s.properties
            .iter()
            .filter(|(_, v)| v.as_f64().is_some_and(f64::is_finite))
            .map(|(k, _)| k.clone())
            .collect()
    };
    let mut common = numeric_keys(&structures[0]);
    for s in &structures[1..] {
        let keys = numeric_keys(s);
        common.retain(|k| keys.contains(k));
    }
    let (features, targets): (Vec<String>, Vec<String>) =
        common.into_iter().partition(|k| k.starts_with(FEATURE_PREFIX));
    if targets.is_empty() {
        return Err(Error::Invalid("no candidate targets".into()));
    }
    meta.targets = targets.into_iter().map(|k| (k, TargetSpec::default())).collect();
    meta.features = features;
    meta.smiles_amenable = structures.iter().all(|s| s.properties.contains_key("smiles"));
    Ok(meta)
}

pub(crate) const FEATURE_PREFIX: &str = "feature.";
