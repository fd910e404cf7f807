//! Atom-centered symmetry functions (radial G2, angular G4).

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::neighbors::{neighbor_list, NeighborList};
use crate::chemio::{Element, Structure};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialTerm {
    pub eta: f64,
    pub r_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularTerm {
    pub eta: f64,
    pub zeta: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcsfConfig {
    pub r_cut: f64,
    pub radial: Vec<RadialTerm>,
    pub angular: Vec<AngularTerm>,
    /// Element channels, ordered by atomic number.
    pub elements: Vec<Element>,
}

impl AcsfConfig {
    /// Uniform grid: 8 radial shells on `[0.5, r_cut − 0.5]` and angular
    /// terms for `ζ ∈ {1, 2, 4}`, `λ = ±1`.
    pub fn uniform(r_cut: f64, elements: &[Element]) -> AcsfConfig {
        let mut elements = elements.to_vec();
        elements.sort();
        elements.dedup();
        let count = 8;
        let (lo, hi) = (0.5, (r_cut - 0.5).max(0.5 + 1e-3));
        let spacing = (hi - lo) / (count - 1) as f64;
        let eta = 1.0 / (2.0 * spacing * spacing);
        let radial = (0..count)
            .map(|k| RadialTerm {
                eta,
                r_s: lo + spacing * k as f64,
            })
            .collect();
        let mut angular = Vec::new();
        for zeta in [1.0, 2.0, 4.0] {
            for lambda in [-1.0, 1.0] {
                angular.push(AngularTerm {
                    eta: 0.005,
                    zeta,
                    lambda,
                });
            }
        }
        AcsfConfig {
            r_cut,
            radial,
            angular,
            elements,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_cut > 0.0 && self.r_cut.is_finite()) {
            return Err(Error::Invalid(format!("r_cut must be positive, got {}", self.r_cut)));
        }
        if self.radial.is_empty() || self.angular.is_empty() {
            return Err(Error::Invalid("ACSF grids must be nonempty".into()));
        }
        if self.radial.iter().any(|t| !(t.eta > 0.0)) || self.angular.iter().any(|t| !(t.eta > 0.0)) {
            return Err(Error::Invalid("ACSF η must be positive".into()));
        }
        if self.angular.iter().any(|t| !(t.zeta >= 1.0)) {
            return Err(Error::Invalid("ACSF ζ must be at least 1".into()));
        }
        if self.angular.iter().any(|t| t.lambda != 1.0 && t.lambda != -1.0) {
            return Err(Error::Invalid("ACSF λ must be +1 or −1".into()));
        }
        if self.elements.is_empty() {
            return Err(Error::Invalid("ACSF element set is empty".into()));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        let ne = self.elements.len();
        ne * self.radial.len() + ne * (ne + 1) / 2 * self.angular.len()
    }
}

fn cutoff(r: f64, r_cut: f64) -> f64 {
    if r >= r_cut {
        0.0
    } else {
        0.5 * ((std::f64::consts::PI * r / r_cut).cos() + 1.0)
    }
}

fn pair_block(a: usize, b: usize, n: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * (2 * n - a + 1) / 2 + (b - a)
}

/// Per-atom symmetry functions; row layout: radial block per element, then
/// angular block per unordered element pair `(e ≤ e')`.
pub fn acsf<T: Scalar>(structure: &Structure, neighbors: &NeighborList, config: &AcsfConfig) -> Result<Array2<T>> {
    config.validate()?;
    let ne = config.elements.len();
    let channels = structure
        .elements
        .iter()
        .map(|e| {
            config
                .elements
                .binary_search(e)
                .map_err(|_| Error::Invalid(format!("element {e} is not among the ACSF channels")))
        })
        .collect::<Result<Vec<_>>>()?;
    let n_rad = config.radial.len();
    let n_ang = config.angular.len();
    let ang_offset = ne * n_rad;
    let mut out = Array2::<T>::zeros((structure.len(), config.width()));
    for i in 0..structure.len() {
        let nbs = neighbors.of(i);
        let mut row = vec![0.0f64; config.width()];
        for nb in nbs {
            let fc = cutoff(nb.distance, config.r_cut);
            let base = channels[nb.index] * n_rad;
            for (k, t) in config.radial.iter().enumerate() {
                let d = nb.distance - t.r_s;
                row[base + k] += (-t.eta * d * d).exp() * fc;
            }
        }
        for (j, a) in nbs.iter().enumerate() {
            let fa = cutoff(a.distance, config.r_cut);
            for b in &nbs[j + 1..] {
                let fb = cutoff(b.distance, config.r_cut);
                let d = [b.vector[0] - a.vector[0], b.vector[1] - a.vector[1], b.vector[2] - a.vector[2]];
                let r_jk = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                let fjk = cutoff(r_jk, config.r_cut);
                let f = fa * fb * fjk;
                if f == 0.0 {
                    continue;
                }
                let cos = (a.vector[0] * b.vector[0] + a.vector[1] * b.vector[1] + a.vector[2] * b.vector[2])
                    / (a.distance * b.distance);
                let r2 = a.distance * a.distance + b.distance * b.distance + r_jk * r_jk;
                let base = ang_offset + pair_block(channels[a.index], channels[b.index], ne) * n_ang;
                for (k, t) in config.angular.iter().enumerate() {
                    let ang = (1.0 + t.lambda * cos).max(0.0).powf(t.zeta);
                    row[base + k] += 2f64.powf(1.0 - t.zeta) * ang * (-t.eta * r2).exp() * f;
                }
            }
        }
        for (dst, v) in out.row_mut(i).iter_mut().zip(row) {
            *dst = T::lit(v);
        }
    }
    Ok(out)
}

/// Computes the neighbor list and evaluates [`acsf`].
pub fn acsf_structure<T: Scalar>(structure: &Structure, config: &AcsfConfig) -> Result<Array2<T>> {
    if !structure.has_geometry() {
        return Err(Error::Scope("ACSF needs atomic coordinates".into()));
    }
    let neighbors = neighbor_list(structure, config.r_cut)?;
    acsf(structure, &neighbors, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(s: &str) -> Element {
        Element::from_symbol(s).unwrap()
    }

    #[test]
    fn pair_blocks_enumerate_upper_triangle() {
        for n in 1..5 {
            let mut seen = Vec::new();
            for a in 0..n {
                for b in a..n {
                    seen.push(pair_block(a, b, n));
                    assert_eq!(pair_block(a, b, n), pair_block(b, a, n));
                }
            }
            assert_eq!(seen, (0..n * (n + 1) / 2).collect::<Vec<_>>());
        }
    }

    #[test]
    fn isolated_atom_gives_zero_row() {
        let s = Structure::molecule(vec![el("C")], vec![[0.0; 3]]).unwrap();
        let cfg = AcsfConfig::uniform(4.0, &[el("C"), el("H")]);
        let m = acsf_structure::<f64>(&s, &cfg).unwrap();
        assert_eq!(m.shape(), &[1, cfg.width()]);
        assert!(m.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn narrow_gaussian_picks_out_cutoff_value() {
        let r_s = 1.3;
        let s = Structure::molecule(vec![el("H"), el("H")], vec![[0.0; 3], [r_s, 0.0, 0.0]]).unwrap();
        let mut cfg = AcsfConfig::uniform(4.0, &[el("H")]);
        cfg.radial = vec![RadialTerm { eta: 100.0, r_s }];
        let m = acsf_structure::<f64>(&s, &cfg).unwrap();
        let want = 0.5 * ((std::f64::consts::PI * r_s / 4.0).cos() + 1.0);
        assert!((m[[0, 0]] - want).abs() < 1e-12);
    }

    #[test]
    fn mirror_image_is_identical() {
        let s = Structure::molecule(
            vec![el("C"), el("H"), el("O"), el("H")],
            vec![[0.0, 0.0, 0.0], [1.0, 0.2, 0.1], [-0.4, 1.1, 0.3], [0.2, -0.3, 1.0]],
        )
        .unwrap();
        let mut m = s.clone();
        for p in m.positions.iter_mut() {
            p[0] = -p[0];
        }
        let cfg = AcsfConfig::uniform(3.5, &[el("H"), el("C"), el("O")]);
        let a = acsf_structure::<f64>(&s, &cfg).unwrap();
        let b = acsf_structure::<f64>(&m, &cfg).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= 1e-13 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn angular_term_for_right_angle() {
        // H at origin with two H neighbors along x and y
        let s = Structure::molecule(
            vec![el("H"), el("H"), el("H")],
            vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        )
        .unwrap();
        let mut cfg = AcsfConfig::uniform(5.0, &[el("H")]);
        cfg.angular = vec![AngularTerm { eta: 0.1, zeta: 2.0, lambda: 1.0 }];
        let m = acsf_structure::<f64>(&s, &cfg).unwrap();
        let fc = |r: f64| 0.5 * ((std::f64::consts::PI * r / 5.0).cos() + 1.0);
        let r_jk = 2f64.sqrt();
        let want = 0.5 * 1.0 * (-0.1f64 * 4.0).exp() * fc(1.0) * fc(1.0) * fc(r_jk);
        assert!((m[[0, cfg.radial.len()]] - want).abs() < 1e-14);
    }
}
