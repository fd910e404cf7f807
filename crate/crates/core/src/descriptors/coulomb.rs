use std::cmp::Ordering;

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::chemio::Structure;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoulombReduction {
    SortedL2,
    Spectral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoulombConfig {
    /// Padding dimension; must be at least the largest atom count.
    pub max_atoms: usize,
    pub reduction: CoulombReduction,
}

/// `C_ii = ½ Z_i^2.4`, `C_ij = Z_i Z_j / |r_i − r_j|` with distances in Å.
pub fn coulomb_matrix<T: Scalar>(structure: &Structure) -> Result<Array2<T>> {
    if structure.is_periodic() {
        return Err(Error::Scope("Coulomb matrix is defined for non-periodic structures only".into()));
    }
    if !structure.has_geometry() {
        return Err(Error::Scope("Coulomb matrix needs atomic coordinates".into()));
    }
    let n = structure.len();
    let z: Vec<f64> = structure.elements.iter().map(|e| e.number() as f64).collect();
    let mut c = Array2::<T>::zeros((n, n));
    for i in 0..n {
        c[[i, i]] = T::lit(0.5 * z[i].powf(2.4));
        for j in (i + 1)..n {
            let (a, b) = (structure.positions[i], structure.positions[j]);
            let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
            if d <= 0.0 {
                return Err(Error::Invalid(format!("atoms {i} and {j} coincide")));
            }
            let v = T::lit(z[i] * z[j] / d);
            c[[i, j]] = v;
            c[[j, i]] = v;
        }
    }
    Ok(c)
}

fn check_size(n: usize, max_atoms: usize) -> Result<()> {
    if n > max_atoms {
        Err(Error::Invalid(format!("{n} atoms exceed the padding size {max_atoms}")))
    } else {
        Ok(())
    }
}

/// Rows and columns reordered by descending row norm, zero-padded to
/// `max_atoms × max_atoms` and flattened row-major.
///
/// Each row is reduced through its entries sorted by value, so the norm and
/// the lexicographic tie-break do not depend on the input atom order.
pub fn reduce_sorted_l2<T: Scalar>(c: ArrayView2<T>, max_atoms: usize) -> Result<Array1<T>> {
    let n = c.nrows();
    check_size(n, max_atoms)?;
    let keys: Vec<(T, Vec<T>)> = (0..n)
        .map(|i| {
            let mut row: Vec<T> = c.row(i).to_vec();
            row.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
            let mut sq: Vec<T> = row.iter().map(|v| *v * *v).collect();
            sq.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
            let norm = sq.into_iter().fold(T::zero(), |s, v| s + v).sqrt();
            (norm, row)
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (na, ra) = &keys[a];
        let (nb, rb) = &keys[b];
        nb.partial_cmp(na).unwrap_or(Ordering::Equal).then_with(|| {
            rb.iter()
                .zip(ra)
                .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });
    let mut out = Array1::<T>::zeros(max_atoms * max_atoms);
    for (a, &i) in order.iter().enumerate() {
        for (b, &j) in order.iter().enumerate() {
            out[a * max_atoms + b] = c[[i, j]];
        }
    }
    Ok(out)
}

/// Eigenvalues sorted by descending magnitude (ties: larger signed value
/// first), zero-padded to `max_atoms`.
pub fn reduce_spectral<T: Scalar>(c: ArrayView2<T>, max_atoms: usize) -> Result<Array1<T>> {
    check_size(c.nrows(), max_atoms)?;
    let mut values = symmetric_eigen(c)?.values.to_vec();
    values.sort_by(|a, b| {
        b.abs()
            .partial_cmp(&a.abs())
            .unwrap_or(Ordering::Equal)
            .then(b.partial_cmp(a).unwrap_or(Ordering::Equal))
    });
    let mut out = Array1::<T>::zeros(max_atoms);
    for (k, v) in values.into_iter().enumerate() {
        out[k] = v;
    }
    Ok(out)
}

/// Coulomb matrix followed by the configured reduction.
pub fn coulomb_descriptor<T: Scalar>(structure: &Structure, config: &CoulombConfig) -> Result<Array1<T>> {
    let c = coulomb_matrix::<T>(structure)?;
    match config.reduction {
        CoulombReduction::SortedL2 => reduce_sorted_l2(c.view(), config.max_atoms),
        CoulombReduction::Spectral => reduce_spectral(c.view(), config.max_atoms),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chemio::Element;
    use ndarray::array;

    fn el(s: &str) -> Element {
        Element::from_symbol(s).unwrap()
    }

    fn h2() -> Structure {
        Structure::molecule(vec![el("H"), el("H")], vec![[0.0; 3], [0.0, 0.0, 1.0]]).unwrap()
    }

    #[test]
    fn single_hydrogen() {
        let s = Structure::molecule(vec![el("H")], vec![[0.0; 3]]).unwrap();
        assert_eq!(coulomb_matrix::<f64>(&s).unwrap(), array![[0.5]]);
    }

    #[test]
    fn hydrogen_molecule() {
        let c = coulomb_matrix::<f64>(&h2()).unwrap();
        assert_eq!(c, array![[0.5, 1.0], [1.0, 0.5]]);
        let spec = reduce_spectral(c.view(), 3).unwrap();
        assert!((spec[0] - 1.5).abs() < 1e-14);
        assert!((spec[1] + 0.5).abs() < 1e-14);
        assert_eq!(spec[2], 0.0);
    }

    #[test]
    fn heavy_atom_diagonal() {
        let s = Structure::molecule(vec![el("O")], vec![[0.0; 3]]).unwrap();
        let c = coulomb_matrix::<f64>(&s).unwrap();
        assert!((c[[0, 0]] - 0.5 * 8f64.powf(2.4)).abs() < 1e-12);
    }

    #[test]
    fn permutation_permutes_matrix() {
        let s = Structure::molecule(
            vec![el("O"), el("H"), el("C")],
            vec![[0.0; 3], [0.9, 0.0, 0.0], [0.0, 1.2, 0.3]],
        )
        .unwrap();
        let p = [2, 0, 1];
        let t = Structure::molecule(p.iter().map(|&i| s.elements[i]).collect(), p.iter().map(|&i| s.positions[i]).collect())
            .unwrap();
        let a = coulomb_matrix::<f64>(&s).unwrap();
        let b = coulomb_matrix::<f64>(&t).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(b[[i, j]], a[[p[i], p[j]]]);
            }
        }
    }

    #[test]
    fn sorted_reduction_pads() {
        let v = reduce_sorted_l2(array![[0.5]].view(), 3).unwrap();
        assert_eq!(v.len(), 9);
        assert_eq!(v.iter().filter(|x| **x != 0.0).count(), 1);
        assert_eq!(v[0], 0.5);
        let already = array![[3.0, 1.0], [1.0, 2.0]];
        assert_eq!(reduce_sorted_l2(already.view(), 2).unwrap().to_vec(), vec![3.0, 1.0, 1.0, 2.0]);
        assert!(reduce_sorted_l2(already.view(), 1).is_err());
    }

    #[test]
    fn spectral_single() {
        let v = reduce_spectral(array![[0.5]].view(), 3).unwrap();
        assert_eq!(v.to_vec(), vec![0.5, 0.0, 0.0]);
    }

    #[test]
    fn coincident_atoms_rejected() {
        let s = Structure::molecule(vec![el("H"), el("H")], vec![[0.0; 3], [0.0; 3]]).unwrap();
        assert!(coulomb_matrix::<f64>(&s).is_err());
    }

    #[test]
    fn periodic_rejected() {
        let mut s = h2();
        s.cell = Some([[5.0, 0.0, 0.0], [0.0, 5.0, 0.0], [0.0, 0.0, 5.0]]);
        s.pbc = [true; 3];
        assert!(matches!(coulomb_matrix::<f64>(&s), Err(Error::Scope(_))));
    }
}
