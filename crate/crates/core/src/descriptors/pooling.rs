//! Reductions from per-atom rows to one global vector.

use ndarray::{Array1, ArrayView2, Axis};

use crate::chemio::Element;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Mean over atoms.
pub fn pool_intensive<T: Scalar>(m: ArrayView2<T>) -> Result<Array1<T>> {
    m.mean_axis(Axis(0))
        .filter(|_| m.nrows() > 0)
        .ok_or_else(|| Error::Invalid("cannot pool an empty atom matrix".into()))
}

/// Mean within each species, concatenated in `elements` order; absent
/// species contribute a zero block.
pub fn pool_intensive_per_element<T: Scalar>(
    m: ArrayView2<T>,
    labels: &[Element],
    elements: &[Element],
) -> Result<Array1<T>> {
    if m.nrows() == 0 {
        return Err(Error::Invalid("cannot pool an empty atom matrix".into()));
    }
    if labels.len() != m.nrows() {
        return Err(Error::Invalid(format!("{} labels for {} atom rows", labels.len(), m.nrows())));
    }
    if let Some(e) = labels.iter().find(|e| !elements.contains(e)) {
        return Err(Error::Invalid(format!("element {e} missing from pooling channels")));
    }
    let d = m.ncols();
    let mut out = Array1::<T>::zeros(d * elements.len());
    for (k, e) in elements.iter().enumerate() {
        let rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == *e).collect();
        if rows.is_empty() {
            continue;
        }
        let mean = m.select(Axis(0), &rows).mean_axis(Axis(0)).expect("nonempty");
        out.slice_mut(ndarray::s![k * d..(k + 1) * d]).assign(&mean);
    }
    Ok(out)
}

/// Sum over atoms.
pub fn pool_extensive<T: Scalar>(m: ArrayView2<T>) -> Result<Array1<T>> {
    if m.nrows() == 0 {
        return Err(Error::Invalid("cannot pool an empty atom matrix".into()));
    }
    Ok(m.sum_axis(Axis(0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn mean_of_two_rows() {
        let m = array![[0.0, 2.0], [2.0, 0.0]];
        assert_eq!(pool_intensive(m.view()).unwrap(), array![1.0, 1.0]);
    }

    #[test]
    fn per_element_water() {
        let o = Element::from_symbol("O").unwrap();
        let h = Element::from_symbol("H").unwrap();
        let m = array![[1.0, 1.0], [2.0, 0.0], [4.0, 2.0]];
        let v = pool_intensive_per_element(m.view(), &[o, h, h], &[h, o]).unwrap();
        assert_eq!(v, array![3.0, 1.0, 1.0, 1.0]);
        let c = Element::from_symbol("C").unwrap();
        let v = pool_intensive_per_element(m.view(), &[o, h, h], &[h, c, o]).unwrap();
        assert_eq!(v, array![3.0, 1.0, 0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn extensive_is_n_times_intensive() {
        let m = array![[0.3f64, -1.2, 4.0], [2.5, 0.1, -0.7], [1.1, 1.9, 0.0]];
        let i = pool_intensive(m.view()).unwrap();
        let e = pool_extensive(m.view()).unwrap();
        for (a, b) in e.iter().zip(i.iter()) {
            assert!((a - 3.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_input_rejected() {
        let m = ndarray::Array2::<f64>::zeros((0, 3));
        assert!(pool_intensive(m.view()).is_err());
        assert!(pool_extensive(m.view()).is_err());
    }
}
