//! Structure files, dataset metadata and CSV ingestion.

mod element;
mod extxyz;
mod meta;
mod structure;
mod table;

use std::path::Path;

use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

pub use element::Element;
pub use extxyz::{parse_extxyz, write_extxyz};
pub use meta::{generate_metadata, parse_metadata, parse_metadata_with_warnings, DatasetMeta, Scaling, TargetSpec, Task};
pub use structure::{det3, Property, Structure};
pub use table::{csv_headers, csv_to_dataset, ColumnMap};

use crate::error::{Error, Result};

/// Structures together with the metadata describing their targets.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub structures: Vec<Structure>,
    pub meta: DatasetMeta,
}

impl Dataset {
    /// Validates that every declared target is a finite number on every structure.
    pub fn new(structures: Vec<Structure>, meta: DatasetMeta) -> Result<Dataset> {
        if structures.is_empty() {
            return Err(Error::Invalid("dataset has no structures".into()));
        }
        for (i, s) in structures.iter().enumerate() {
            s.validate().map_err(|e| Error::Invalid(format!("structure {i}: {e}")))?;
            for t in meta.targets.keys() {
                match s.number(t) {
                    Some(v) if v.is_finite() => {}
                    _ => {
                        return Err(Error::Schema(format!(
                            "structure {i} lacks a finite numeric value for target '{t}'"
                        )))
                    }
                }
            }
            for f in &meta.features {
                if s.number(f).is_none() {
                    return Err(Error::Schema(format!("structure {i} lacks feature '{f}'")));
                }
            }
            for e in &s.elements {
                if !e.is_dummy() && !meta.elements.is_empty() && !meta.elements.contains(e) {
                    return Err(Error::Schema(format!(
                        "structure {i} contains element {e} missing from metadata 'elements'"
                    )));
                }
            }
        }
        if meta.task == Task::Classification {
            for t in meta.targets.keys() {
                let labels: std::collections::BTreeSet<u64> =
                    structures.iter().map(|s| s.number(t).unwrap().to_bits()).collect();
                if labels.len() > 2 {
                    return Err(Error::Schema(format!(
                        "classification target '{t}' has {} distinct labels; only binary labels are supported",
                        labels.len()
                    )));
                }
            }
        }
        Ok(Dataset { structures, meta })
    }

    /// Reads the metadata file and the extxyz file it points to
    /// (`source_path` is resolved relative to the metadata file).
    pub fn load(meta_path: &Path) -> Result<Dataset> {
        let text = std::fs::read_to_string(meta_path)?;
        let mut meta = parse_metadata(&text)?;
        let source = Path::new(&meta.source_path);
        let source = if source.is_absolute() {
            source.to_path_buf()
        } else {
            meta_path.parent().unwrap_or(Path::new(".")).join(source)
        };
        let structures = parse_extxyz(&std::fs::read_to_string(&source)?)?;
        if meta.elements.is_empty() {
            let mut all: Vec<Element> = structures
                .iter()
                .flat_map(|s| s.elements.iter().copied())
                .filter(|e| !e.is_dummy())
                .collect();
            all.sort();
            all.dedup();
            meta.elements = all;
        }
        Dataset::new(structures, meta)
    }

    pub fn len(&self) -> usize {
        self.structures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structures.is_empty()
    }

    pub fn target_values(&self, name: &str) -> Result<Array1<f64>> {
        self.structures
            .iter()
            .map(|s| s.number(name).ok_or_else(|| Error::Schema(format!("missing target '{name}'"))))
            .collect()
    }

    pub fn sizes(&self) -> Array1<f64> {
        self.structures.iter().map(|s| s.len() as f64).collect()
    }

    pub fn has_geometry(&self) -> bool {
        self.structures.iter().all(Structure::has_geometry)
    }

    /// Precomputed feature columns listed in `meta.features`.
    pub fn feature_matrix(&self) -> Result<Array2<f64>> {
        if self.meta.features.is_empty() {
            return Err(Error::Scope("dataset carries no precomputed features".into()));
        }
        let mut x = Array2::zeros((self.len(), self.meta.features.len()));
        for (i, s) in self.structures.iter().enumerate() {
            for (j, f) in self.meta.features.iter().enumerate() {
                x[[i, j]] = s
                    .number(f)
                    .ok_or_else(|| Error::Schema(format!("structure {i} lacks feature '{f}'")))?;
            }
        }
        Ok(x)
    }

    /// SHA-256 over the exact bit patterns of every structure plus the metadata JSON.
    pub fn content_digest(&self) -> String {
        let mut h = Sha256::new();
        for s in &self.structures {
            h.update((s.len() as u64).to_le_bytes());
            for (e, p) in s.elements.iter().zip(&s.positions) {
                h.update([e.number()]);
                for x in p {
                    h.update(x.to_bits().to_le_bytes());
                }
            }
            if let Some(cell) = &s.cell {
                h.update(b"cell");
                for x in cell.iter().flatten() {
                    h.update(x.to_bits().to_le_bytes());
                }
            }
            h.update(s.pbc.map(u8::from));
            for (k, v) in &s.properties {
                h.update(k.as_bytes());
                h.update([0]);
                match v {
                    Property::Number(x) => h.update(x.to_bits().to_le_bytes()),
                    Property::Text(t) => {
                        h.update(b"T");
                        h.update(t.as_bytes());
                    }
                }
                h.update([0]);
            }
        }
        h.update(self.meta.to_json_string().as_bytes());
        hex::encode(h.finalize())
    }
}
