//! CSV ingestion.

use std::collections::{BTreeMap, HashMap};

use super::meta::FEATURE_PREFIX;
use super::{Dataset, DatasetMeta, Element, Property, Structure, TargetSpec};
use crate::error::{Error, Result};

/// Assignment of CSV columns to roles.
///
/// Either geometry columns (`element`, `x`, `y`, `z`, optional molecule `id`)
/// or precomputed `features`, plus at least one target.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColumnMap {
    pub id: Option<String>,
    pub element: Option<String>,
    pub x: Option<String>,
    pub y: Option<String>,
    pub z: Option<String>,
    pub smiles: Option<String>,
    pub features: Vec<String>,
    pub targets: Vec<String>,
}

impl ColumnMap {
    /// Parses `role=column` pairs separated by commas, e.g.
    /// `id=mol,element=el,x=x,y=y,z=z,target=energy`. `target` and `feature`
    /// may repeat.
    pub fn parse(spec: &str) -> Result<ColumnMap> {
        let mut map = ColumnMap::default();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (role, column) = item
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("column map entry '{item}' is not role=column")))?;
            let column = column.trim().to_string();
            match role.trim() {
                "id" => map.id = Some(column),
                "element" => map.element = Some(column),
                "x" => map.x = Some(column),
                "y" => map.y = Some(column),
                "z" => map.z = Some(column),
                "smiles" => map.smiles = Some(column),
                "feature" => map.features.push(column),
                "target" => map.targets.push(column),
                other => return Err(Error::Invalid(format!("unknown column role '{other}'"))),
            }
        }
        Ok(map)
    }

    /// Guesses roles from conventional header names.
    ///
    /// With `x`,`y`,`z` and `element` (or `symbol`) columns present, the table
    /// is read as one atom per row and every other column except `id`/`mol`
    /// becomes a target. Otherwise the last column is the target and the
    /// rest are features (a `smiles` column is kept as text).
    pub fn infer(headers: &[String]) -> ColumnMap {
        let find = |names: &[&str]| headers.iter().find(|h| names.contains(&h.to_lowercase().as_str())).cloned();
        let mut map = ColumnMap {
            id: find(&["id", "mol", "molecule"]),
            element: find(&["element", "symbol", "species"]),
            x: find(&["x"]),
            y: find(&["y"]),
            z: find(&["z"]),
            smiles: find(&["smiles"]),
            ..Default::default()
        };
        let mut used = vec![map.id.clone(), map.smiles.clone()];
        if map.is_geometry() {
            used.extend([map.element.clone(), map.x.clone(), map.y.clone(), map.z.clone()]);
        } else {
            map.element = None;
            map.x = None;
            map.y = None;
            map.z = None;
        }
        let rest: Vec<String> = headers.iter().filter(|h| !used.contains(&Some((*h).clone()))).cloned().collect();
        if map.is_geometry() {
            map.targets = rest;
        } else if let Some((last, others)) = rest.split_last() {
            map.targets = vec![last.clone()];
            map.features = others.to_vec();
        }
        map
    }

    fn is_geometry(&self) -> bool {
        self.element.is_some() && self.x.is_some() && self.y.is_some() && self.z.is_some()
    }
}

/// Header row of a CSV table; an input without one is an error.
pub fn csv_headers(csv_text: &str) -> Result<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(csv_text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(Error::Schema("CSV has no header row".into()));
    }
    Ok(headers)
}

/// Converts a CSV table (RFC 4180, header row required) into a dataset.
pub fn csv_to_dataset(csv_text: &str, column_map: &ColumnMap) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h.as_str(), i)).collect();
    let col = |name: &String| -> Result<usize> {
        index
            .get(name.as_str())
            .copied()
            .ok_or_else(|| Error::Schema(format!("missing mapped column '{name}'")))
    };

    if column_map.targets.is_empty() {
        return Err(Error::Schema("column map assigns no target column".into()));
    }
    let geometry = column_map.is_geometry();
    if !geometry && column_map.features.is_empty() && column_map.smiles.is_none() {
        return Err(Error::Schema(
            "column map needs element+x+y+z columns, feature columns or a smiles column".into(),
        ));
    }
    let target_cols: Vec<(String, usize)> =
        column_map.targets.iter().map(|t| Ok((t.clone(), col(t)?))).collect::<Result<_>>()?;
    let feature_cols: Vec<(String, usize)> =
        column_map.features.iter().map(|t| Ok((t.clone(), col(t)?))).collect::<Result<_>>()?;
    let smiles_col = column_map.smiles.as_ref().map(col).transpose()?;
    let id_col = column_map.id.as_ref().map(col).transpose()?;
    let geom_cols = if geometry {
        let c = |o: &Option<String>| col(o.as_ref().unwrap());
        Some((c(&column_map.element)?, [c(&column_map.x)?, c(&column_map.y)?, c(&column_map.z)?]))
    } else {
        None
    };

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // header is line 1
        let line = i + 2;
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { .. } => Error::parse(line, "ragged row (column count differs from header)"),
            _ => Error::parse(line, e.to_string()),
        })?;
        rows.push((line, record));
    }
    if rows.is_empty() {
        return Err(Error::Invalid("no data rows".into()));
    }

    let number = |line: usize, record: &csv::StringRecord, c: usize, what: &str| -> Result<f64> {
        let raw = &record[c];
        raw.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::parse(line, format!("non-numeric {what} '{raw}' in column '{}'", headers[c])))
    };

    let mut structures = Vec::new();
    if let Some((element_col, xyz)) = geom_cols {
        // group rows by molecule id in order of first appearance
        let mut order: Vec<String> = Vec::new();
        let mut groups: HashMap<String, Vec<usize>> = HashMap::new();
        for (k, (_, record)) in rows.iter().enumerate() {
            let key = match id_col {
                Some(c) => record[c].to_string(),
                None => k.to_string(),
            };
            groups.entry(key.clone()).or_insert_with(|| {
                order.push(key.clone());
                Vec::new()
            });
            groups.get_mut(&key).unwrap().push(k);
        }
        for key in order {
            let members = &groups[&key];
            let mut elements = Vec::new();
            let mut positions = Vec::new();
            let mut props = BTreeMap::new();
            for &k in members {
                let (line, record) = &rows[k];
                let sym = &record[element_col];
                elements.push(
                    Element::from_symbol(sym)
                        .filter(|e| !e.is_dummy())
                        .ok_or_else(|| Error::parse(*line, format!("unknown element symbol '{sym}'")))?,
                );
                let mut p = [0.0; 3];
                for d in 0..3 {
                    p[d] = number(*line, record, xyz[d], "coordinate")?;
                }
                positions.push(p);
                for (name, c) in &target_cols {
                    let v = number(*line, record, *c, "target")?;
                    match props.get(name) {
                        Some(Property::Number(prev)) if *prev != v => {
                            return Err(Error::parse(
                                *line,
                                format!("target '{name}' differs between rows of molecule '{key}'"),
                            ))
                        }
                        _ => {
                            props.insert(name.clone(), Property::Number(v));
                        }
                    }
                }
            }
            if id_col.is_some() {
                props.insert("id".into(), Property::Text(key.clone()));
            }
            let mut s = Structure::molecule(elements, positions)?;
            s.properties = props;
            structures.push(s);
        }
    } else {
        for (line, record) in &rows {
            let mut props = BTreeMap::new();
            for (name, c) in &target_cols {
                props.insert(name.clone(), Property::Number(number(*line, record, *c, "target")?));
            }
            for (name, c) in &feature_cols {
                props.insert(
                    format!("{FEATURE_PREFIX}{name}"),
                    Property::Number(number(*line, record, *c, "feature")?),
                );
            }
            if let Some(c) = smiles_col {
                props.insert("smiles".into(), Property::Text(record[c].to_string()));
            }
            if let Some(c) = id_col {
                props.insert("id".into(), Property::Text(record[c].to_string()));
            }
            structures.push(Structure::placeholder(props));
        }
    }

    let mut meta = DatasetMeta::new("csv", "");
    meta.targets = column_map
        .targets
        .iter()
        .map(|t| (t.clone(), TargetSpec::default()))
        .collect();
    let mut elements: Vec<Element> = structures
        .iter()
        .flat_map(|s| s.elements.iter().copied())
        .filter(|e| !e.is_dummy())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    elements.sort_by(|a, b| a.symbol().cmp(b.symbol()));
    meta.elements = elements;
    let mut features: Vec<String> = feature_cols.iter().map(|(n, _)| format!("{FEATURE_PREFIX}{n}")).collect();
    features.sort();
    meta.features = features;
    meta.smiles_amenable = smiles_col.is_some();
    Dataset::new(structures, meta)
}
