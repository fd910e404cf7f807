//! Smooth-overlap density expansion and its rotationally invariant contractions.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::harmonics::real_spherical_harmonics;
use super::neighbors::{neighbor_list, NeighborList};
use super::radial::RadialBasis;
use crate::chemio::{Element, Structure};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoapConfig {
    pub r_cut: f64,
    pub n_max: usize,
    pub l_max: usize,
    pub sigma: f64,
    pub cross_channels: bool,
    /// Element channels, ordered by atomic number.
    pub elements: Vec<Element>,
}

impl SoapConfig {
    pub fn new(r_cut: f64, n_max: usize, l_max: usize, elements: &[Element]) -> SoapConfig {
        let mut elements = elements.to_vec();
        elements.sort();
        elements.dedup();
        SoapConfig {
            r_cut,
            n_max,
            l_max,
            sigma: r_cut / 8.0,
            cross_channels: true,
            elements,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_cut > 0.0 && self.r_cut.is_finite()) {
            return Err(Error::Invalid(format!("r_cut must be positive, got {}", self.r_cut)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Invalid(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.n_max == 0 {
            return Err(Error::Invalid("n_max must be at least 1".into()));
        }
        if self.elements.is_empty() {
            return Err(Error::Invalid("SOAP element set is empty".into()));
        }
        if self.elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("SOAP elements must be unique and ordered by atomic number".into()));
        }
        Ok(())
    }

    fn channel(&self, e: Element) -> Result<usize> {
        self.elements
            .binary_search(&e)
            .map_err(|_| Error::Invalid(format!("element {e} is not among the SOAP channels")))
    }

    /// Length of the per-atom power spectrum.
    pub fn power_spectrum_len(&self) -> usize {
        let ne = self.elements.len();
        let blocks = if self.cross_channels {
            let a = ne * self.n_max;
            a * (a + 1) / 2
        } else {
            ne * self.n_max * (self.n_max + 1) / 2
        };
        blocks * (self.l_max + 1)
    }
}

/// Expansion coefficients `c^e_{nlm}` for every atom.
///
/// Row `i` holds atom `i`; columns are ordered by channel, then `n`, then
/// `lm` (`l² + l + m`).
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicCoefficients<T> {
    pub n_max: usize,
    pub l_max: usize,
    pub elements: Vec<Element>,
    pub data: Array2<T>,
}

impl<T: Scalar> AtomicCoefficients<T> {
    #[inline]
    pub fn n_lm(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1)
    }

    #[inline]
    pub fn column(&self, channel: usize, n: usize, lm: usize) -> usize {
        (channel * self.n_max + n) * self.n_lm() + lm
    }

    pub fn n_atoms(&self) -> usize {
        self.data.nrows()
    }
}

fn taper(d: f64, r_cut: f64) -> f64 {
    let width = 0.5f64.min(r_cut / 4.0);
    let start = r_cut - width;
    if d <= start {
        1.0
    } else if d >= r_cut {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI * (d - start) / width).cos())
    }
}

/// Reusable SOAP evaluator; holds the tabulated radial basis.
#[derive(Debug, Clone)]
pub struct Soap<T> {
    pub config: SoapConfig,
    basis: RadialBasis<T>,
}

impl<T: Scalar> Soap<T> {
    pub fn new(config: SoapConfig) -> Result<Soap<T>> {
        config.validate()?;
        let basis = RadialBasis::new(config.r_cut, config.n_max, config.sigma)?;
        Ok(Soap { config, basis })
    }

    pub fn expand(&self, structure: &Structure) -> Result<AtomicCoefficients<T>> {
        if !structure.has_geometry() {
            return Err(Error::Scope("SOAP needs atomic coordinates".into()));
        }
        let neighbors = neighbor_list(structure, self.config.r_cut)?;
        self.expand_with(structure, &neighbors)
    }

    pub fn expand_with(&self, structure: &Structure, neighbors: &NeighborList) -> Result<AtomicCoefficients<T>> {
        let cfg = &self.config;
        let n_lm = (cfg.l_max + 1) * (cfg.l_max + 1);
        let width = cfg.elements.len() * cfg.n_max * n_lm;
        let channels = structure
            .elements
            .iter()
            .map(|&e| cfg.channel(e))
            .collect::<Result<Vec<_>>>()?;
        let four_pi = T::lit(4.0 * std::f64::consts::PI);
        let mut data = Array2::<T>::zeros((structure.len(), width));
        for (i, mut row) in data.rows_mut().into_iter().enumerate() {
            for nb in neighbors.of(i) {
                let weight = taper(nb.distance, cfg.r_cut);
                if weight == 0.0 {
                    continue;
                }
                let v = nb.vector.map(T::lit);
                let ylm = real_spherical_harmonics(cfg.l_max, v);
                let radial = self.basis.integrals(T::lit(nb.distance), cfg.l_max);
                let pre = four_pi * T::lit(weight);
                let base = channels[nb.index] * cfg.n_max * n_lm;
                for n in 0..cfg.n_max {
                    for l in 0..=cfg.l_max {
                        let r = pre * radial[[n, l]];
                        for lm in l * l..(l + 1) * (l + 1) {
                            row[base + n * n_lm + lm] += r * ylm[lm];
                        }
                    }
                }
            }
        }
        Ok(AtomicCoefficients {
            n_max: cfg.n_max,
            l_max: cfg.l_max,
            elements: cfg.elements.clone(),
            data,
        })
    }
}

/// Convenience wrapper building the radial basis on each call.
pub fn soap_expand<T: Scalar>(
    structure: &Structure,
    neighbors: &NeighborList,
    config: &SoapConfig,
) -> Result<AtomicCoefficients<T>> {
    Soap::new(config.clone())?.expand_with(structure, neighbors)
}

/// Contracts one coefficient vector (channel, n, lm layout) into
/// `Σ_m c_{a,lm} c'_{b,lm}` with `a = (e, n) ≤ b = (e', n')`, then `l`.
fn contract<T: Scalar>(
    left: &[T],
    right: &[T],
    n_channels: usize,
    n_max: usize,
    l_max: usize,
    cross: bool,
    out: &mut Vec<T>,
) {
    let n_lm = (l_max + 1) * (l_max + 1);
    let n_radial = n_channels * n_max;
    for a in 0..n_radial {
        for b in a..n_radial {
            if !cross && a / n_max != b / n_max {
                continue;
            }
            let (pa, pb) = (a * n_lm, b * n_lm);
            for l in 0..=l_max {
                let mut s = T::zero();
                for lm in l * l..(l + 1) * (l + 1) {
                    s += left[pa + lm] * right[pb + lm];
                }
                out.push(s);
            }
        }
    }
}

/// Per-atom power spectrum `p^{(e,e')}_{nn'l} = Σ_m c^e_{nlm} c^{e'}_{n'lm}`.
///
/// Values are not normalized, so the `cross = false` output is an exact
/// subsequence of the `cross = true` output; see [`l2_rows`].
///
/// [`l2_rows`]: super::normalize::l2_rows
pub fn soap_power_spectrum<T: Scalar>(coeffs: &AtomicCoefficients<T>, cross: bool) -> Array2<T> {
    let nc = coeffs.elements.len();
    let mut rows = Vec::with_capacity(coeffs.n_atoms());
    for row in coeffs.data.rows() {
        let row = row.to_vec();
        let mut out = Vec::new();
        contract(&row, &row, nc, coeffs.n_max, coeffs.l_max, cross, &mut out);
        rows.push(out);
    }
    let width = rows.first().map_or(0, Vec::len);
    Array2::from_shape_vec((rows.len(), width), rows.concat()).expect("uniform row width")
}

/// Pair spectrum: the power-spectrum contraction of `C = Σ_i c_i`, divided by `N²`.
pub fn pair_spectrum<T: Scalar>(coeffs: &AtomicCoefficients<T>, cross: bool) -> Result<Array1<T>> {
    let n = coeffs.n_atoms();
    if n == 0 {
        return Err(Error::Invalid("pair spectrum of an empty structure".into()));
    }
    let total: Vec<T> = coeffs.data.sum_axis(ndarray::Axis(0)).to_vec();
    let mut out = Vec::new();
    contract(&total, &total, coeffs.elements.len(), coeffs.n_max, coeffs.l_max, cross, &mut out);
    let scale = T::from_usize(n * n).unwrap();
    Ok(Array1::from_vec(out).mapv(|v| v / scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::harmonics::lm_index;

    fn el(s: &str) -> Element {
        Element::from_symbol(s).unwrap()
    }

    fn water() -> Structure {
        Structure::molecule(
            vec![el("O"), el("H"), el("H")],
            vec![[0.0, 0.0, 0.0], [0.757, 0.586, 0.0], [-0.757, 0.586, 0.0]],
        )
        .unwrap()
    }

    fn rotate(s: &Structure, angles: (f64, f64, f64)) -> Structure {
        let (a, b, c) = angles;
        let rz = |t: f64, v: [f64; 3]| [t.cos() * v[0] - t.sin() * v[1], t.sin() * v[0] + t.cos() * v[1], v[2]];
        let ry = |t: f64, v: [f64; 3]| [t.cos() * v[0] + t.sin() * v[2], v[1], -t.sin() * v[0] + t.cos() * v[2]];
        let mut out = s.clone();
        for p in out.positions.iter_mut() {
            *p = rz(c, ry(b, rz(a, *p)));
        }
        out
    }

    fn config() -> SoapConfig {
        SoapConfig::new(3.0, 4, 3, &[el("H"), el("O")])
    }

    #[test]
    fn isolated_atom_has_zero_coefficients() {
        let s = Structure::molecule(vec![el("H")], vec![[0.0; 3]]).unwrap();
        let c = Soap::<f64>::new(config()).unwrap().expand(&s).unwrap();
        assert!(c.data.iter().all(|&v| v == 0.0));
        assert!(soap_power_spectrum(&c, true).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn neighbor_on_z_axis_is_azimuthally_symmetric() {
        let s = Structure::molecule(vec![el("H"), el("O")], vec![[0.0; 3], [0.0, 0.0, 1.1]]).unwrap();
        let c = Soap::<f64>::new(config()).unwrap().expand(&s).unwrap();
        let mut nonzero = false;
        for ch in 0..2 {
            for n in 0..4 {
                for l in 0..=3usize {
                    for m in -(l as i64)..=l as i64 {
                        let v = c.data[[0, c.column(ch, n, lm_index(l, m))]];
                        if m != 0 {
                            assert!(v.abs() < 1e-15);
                        } else if v.abs() > 1e-6 {
                            nonzero = true;
                        }
                    }
                }
            }
        }
        assert!(nonzero);
    }

    #[test]
    fn power_spectrum_is_rotation_invariant() {
        let soap = Soap::<f64>::new(config()).unwrap();
        let s = water();
        let p0 = soap_power_spectrum(&soap.expand(&s).unwrap(), true);
        let p1 = soap_power_spectrum(&soap.expand(&rotate(&s, (0.4, 1.3, -2.2))).unwrap(), true);
        let diff = (&p0 - &p1).mapv(|v| v * v).sum().sqrt();
        let norm = p0.mapv(|v| v * v).sum().sqrt();
        assert!(diff / norm < 1e-10, "{}", diff / norm);
    }

    #[test]
    fn no_cross_is_a_subsequence_of_cross() {
        let cfg = config();
        let soap = Soap::<f64>::new(cfg.clone()).unwrap();
        let c = soap.expand(&water()).unwrap();
        let full = soap_power_spectrum(&c, true);
        let diag = soap_power_spectrum(&c, false);
        assert_eq!(full.ncols(), cfg.power_spectrum_len());
        // independent index oracle
        let (nc, nmax, lmax) = (2, 4, 3);
        let mut keep = Vec::new();
        let mut k = 0;
        for a in 0..nc * nmax {
            for b in a..nc * nmax {
                for _ in 0..=lmax {
                    if a / nmax == b / nmax {
                        keep.push(k);
                    }
                    k += 1;
                }
            }
        }
        assert_eq!(keep.len(), diag.ncols());
        for i in 0..3 {
            for (j, &col) in keep.iter().enumerate() {
                assert_eq!(diag[[i, j]], full[[i, col]]);
            }
        }
    }

    #[test]
    fn pair_spectrum_matches_double_sum() {
        let soap = Soap::<f64>::new(config()).unwrap();
        let c = soap.expand(&water()).unwrap();
        let fast = pair_spectrum(&c, true).unwrap();
        let n = c.n_atoms();
        let mut brute = Array1::<f64>::zeros(fast.len());
        for i in 0..n {
            for j in 0..n {
                let mut out = Vec::new();
                let (a, b) = (c.data.row(i).to_vec(), c.data.row(j).to_vec());
                contract(&a, &b, 2, 4, 3, true, &mut out);
                brute += &Array1::from_vec(out);
            }
        }
        brute /= (n * n) as f64;
        for (x, y) in fast.iter().zip(brute.iter()) {
            assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn single_atom_pair_spectrum_equals_power_spectrum() {
        let s = Structure::molecule(vec![el("H"), el("O")], vec![[0.0; 3], [0.3, 0.9, 0.2]]).unwrap();
        let soap = Soap::<f64>::new(config()).unwrap();
        let c = soap.expand(&s).unwrap();
        let one = AtomicCoefficients {
            data: c.data.slice(ndarray::s![0..1, ..]).to_owned(),
            ..c.clone()
        };
        let ps = soap_power_spectrum(&one, true);
        assert_eq!(pair_spectrum(&one, true).unwrap(), ps.row(0).to_owned());
    }

    #[test]
    fn unknown_element_rejected() {
        let s = Structure::molecule(vec![el("C")], vec![[0.0; 3]]).unwrap();
        assert!(Soap::<f64>::new(config()).unwrap().expand(&s).is_err());
    }

    #[test]
    fn continuous_across_cutoff() {
        let soap = Soap::<f64>::new(config()).unwrap();
        let at = |d: f64| {
            let s = Structure::molecule(vec![el("H"), el("O")], vec![[0.0; 3], [0.0, 0.0, d]]).unwrap();
            soap_power_spectrum(&soap.expand(&s).unwrap(), true)
        };
        let (inside, outside) = (at(3.0 - 1e-8), at(3.0 + 1e-8));
        let jump = (&inside - &outside).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(jump < 1e-6);
    }
}
