//! Length-scale heuristics deriving SOAP cutoffs from characteristic bond lengths.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::soap::SoapConfig;
use crate::chemio::Element;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthScale {
    pub r_min: f64,
    pub r_typ: f64,
}

/// Per-element minimal and typical bond lengths in Å.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LengthScaleTable {
    pub entries: BTreeMap<Element, LengthScale>,
}

/// Bond lengths from covalent radii (Pyykkö): `r_min` twice the triple-bond
/// radius, `r_typ` twice the single-bond radius; H uses the H–H bond for both.
const DEFAULT_TABLE: &str = include_str!("../../data/length_scales.json");

impl Default for LengthScaleTable {
    fn default() -> Self {
        LengthScaleTable::from_json(DEFAULT_TABLE).expect("bundled length-scale table is valid")
    }
}

impl LengthScaleTable {
    pub fn from_json(text: &str) -> Result<LengthScaleTable> {
        let table: LengthScaleTable = serde_json::from_str(text)?;
        table.validate()?;
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<LengthScaleTable> {
        LengthScaleTable::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        for (e, s) in &self.entries {
            if !(s.r_min > 0.0 && s.r_min <= s.r_typ && s.r_typ.is_finite()) {
                return Err(Error::Schema(format!(
                    "length scales for {e} must satisfy 0 < r_min <= r_typ (got {} and {})",
                    s.r_min, s.r_typ
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, e: Element) -> Result<LengthScale> {
        self.entries
            .get(&e)
            .copied()
            .ok_or_else(|| Error::Invalid(format!("no length-scale entry for element {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeuristicVariant {
    Standard,
    Longrange,
    Minimal,
}

/// SOAP configurations for `elements` under the chosen heuristic; every
/// configuration uses `σ = r_cut / 8`.
pub fn length_scale_heuristic(
    elements: &[Element],
    table: &LengthScaleTable,
    variant: HeuristicVariant,
) -> Result<Vec<SoapConfig>> {
    if elements.is_empty() {
        return Err(Error::Invalid("length-scale heuristic needs at least one element".into()));
    }
    let scales = elements.iter().map(|&e| table.get(e)).collect::<Result<Vec<_>>>()?;
    let min_r_min = scales.iter().map(|s| s.r_min).fold(f64::INFINITY, f64::min);
    let max_r_typ = scales.iter().map(|s| s.r_typ).fold(f64::NEG_INFINITY, f64::max);
    let configs = match variant {
        HeuristicVariant::Standard => {
            let r1 = (1.56 * min_r_min).max(2.0);
            let r2 = (1.56 * max_r_typ).max(1.2 * r1);
            vec![SoapConfig::new(r1, 8, 4, elements), SoapConfig::new(r2, 8, 4, elements)]
        }
        HeuristicVariant::Longrange => {
            let rs = (2.34 * min_r_min).max(3.0);
            let rl = (2.34 * max_r_typ).max(1.2 * rs);
            vec![SoapConfig::new(rs, 8, 4, elements), SoapConfig::new(rl, 8, 4, elements)]
        }
        HeuristicVariant::Minimal => vec![SoapConfig::new(1.1 * max_r_typ, 4, 3, elements)],
    };
    Ok(configs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(s: &str) -> Element {
        Element::from_symbol(s).unwrap()
    }

    fn table(entries: &[(&str, f64, f64)]) -> LengthScaleTable {
        LengthScaleTable {
            entries: entries
                .iter()
                .map(|&(s, r_min, r_typ)| (el(s), LengthScale { r_min, r_typ }))
                .collect(),
        }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn standard_hydrogen() {
        let t = table(&[("H", 0.74, 0.74)]);
        let c = length_scale_heuristic(&[el("H")], &t, HeuristicVariant::Standard).unwrap();
        assert_eq!(c.len(), 2);
        assert!(close(c[0].r_cut, 2.0) && close(c[1].r_cut, 2.4));
        assert!(close(c[0].sigma, 0.25) && close(c[1].sigma, 0.3));
    }

    #[test]
    fn minimal_variant() {
        let t = table(&[("H", 0.5, 0.8), ("S", 1.5, 2.0)]);
        let c = length_scale_heuristic(&[el("H"), el("S")], &t, HeuristicVariant::Minimal).unwrap();
        assert_eq!(c.len(), 1);
        assert!(close(c[0].r_cut, 2.2) && close(c[0].sigma, 0.275));
        assert_eq!((c[0].n_max, c[0].l_max), (4, 3));
    }

    #[test]
    fn longrange_uses_heuristic_branch_for_large_r_min() {
        let t = table(&[("S", 1.9, 2.1)]);
        let c = length_scale_heuristic(&[el("S")], &t, HeuristicVariant::Longrange).unwrap();
        assert!(close(c[0].r_cut, 2.34 * 1.9));
        assert!(close(c[1].r_cut, (2.34 * 2.1f64).max(1.2 * 2.34 * 1.9)));
        assert_eq!((c[1].n_max, c[1].l_max), (8, 4));
        let t = table(&[("H", 0.64, 0.64)]);
        let c = length_scale_heuristic(&[el("H")], &t, HeuristicVariant::Longrange).unwrap();
        assert!(close(c[0].r_cut, 3.0));
    }

    #[test]
    fn missing_entry_and_empty_set() {
        let t = table(&[("H", 0.74, 0.74)]);
        assert!(length_scale_heuristic(&[el("C")], &t, HeuristicVariant::Standard).is_err());
        assert!(length_scale_heuristic(&[], &t, HeuristicVariant::Standard).is_err());
    }

    #[test]
    fn default_table_covers_common_elements() {
        let t = LengthScaleTable::default();
        for s in ["H", "C", "N", "O", "F", "S"] {
            t.get(el(s)).unwrap();
        }
        assert!(LengthScaleTable::from_json(r#"{"H": {"r_min": 1.0, "r_typ": 0.5}}"#).is_err());
    }
}
