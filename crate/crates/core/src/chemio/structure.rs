use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::Element;
use crate::error::{Error, Result};

/// A per-structure property value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Property {
    Number(f64),
    Text(String),
}

impl Property {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Property::Number(x) => Some(*x),
            Property::Text(_) => None,
        }
    }
}

/// Atoms with positions in Ångström, an optional lattice and named properties.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    pub elements: Vec<Element>,
    pub positions: Vec<[f64; 3]>,
    /// Lattice vectors as rows.
    pub cell: Option<[[f64; 3]; 3]>,
    pub pbc: [bool; 3],
    pub properties: BTreeMap<String, Property>,
}

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl Structure {
    /// Non-periodic structure without properties.
    pub fn molecule(elements: Vec<Element>, positions: Vec<[f64; 3]>) -> Result<Structure> {
        let s = Structure {
            elements,
            positions,
            cell: None,
            pbc: [false; 3],
            properties: BTreeMap::new(),
        };
        s.validate()?;
        Ok(s)
    }

    /// A geometry-free placeholder: one dummy atom whose properties carry the data.
    pub fn placeholder(properties: BTreeMap<String, Property>) -> Structure {
        Structure {
            elements: vec![Element::DUMMY],
            positions: vec![[0.0; 3]],
            cell: None,
            pbc: [false; 3],
            properties,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_periodic(&self) -> bool {
        self.pbc.iter().any(|&p| p)
    }

    pub fn has_geometry(&self) -> bool {
        !self.elements.iter().any(|e| e.is_dummy())
    }

    pub fn element_set(&self) -> BTreeSet<Element> {
        self.elements.iter().copied().collect()
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.properties.get(key).and_then(Property::as_f64)
    }

    pub fn with_property(mut self, key: &str, value: Property) -> Structure {
        self.properties.insert(key.to_string(), value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.elements.is_empty() {
            return Err(Error::Invalid("structure has no atoms".into()));
        }
        if self.elements.len() != self.positions.len() {
            return Err(Error::Invalid(format!(
                "{} elements but {} positions",
                self.elements.len(),
                self.positions.len()
            )));
        }
        if self.positions.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("non-finite atomic position".into()));
        }
        if self.is_periodic() {
            match &self.cell {
                None => return Err(Error::Invalid("periodic structure without a cell".into())),
                Some(c) if det3(c).abs() <= 1e-12 => {
                    return Err(Error::Invalid("periodic structure with a singular cell".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }
}
