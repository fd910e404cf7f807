use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Scales each row to unit L2 norm; zero rows are left unchanged.
pub fn l2_rows<T: Scalar>(m: ArrayView2<T>) -> Array2<T> {
    let mut out = m.to_owned();
    for mut row in out.rows_mut() {
        let norm = row.iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm > T::zero() {
            row.mapv_inplace(|v| v / norm);
        }
    }
    out
}

const SCALE_FLOOR: f64 = 1e-12;

/// Feature-wise standardization `(x − μ) / s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Whitener<T> {
    pub mean: Array1<T>,
    pub scale: Array1<T>,
}

impl<T: Scalar> Whitener<T> {
    pub fn fit(m: ArrayView2<T>) -> Result<Whitener<T>> {
        if m.nrows() == 0 {
            return Err(Error::Invalid("cannot fit a whitener on zero rows".into()));
        }
        let mean = m.mean_axis(Axis(0)).expect("nonempty");
        let n = T::from_usize(m.nrows()).unwrap();
        let floor = T::lit(SCALE_FLOOR);
        let scale = Array1::from_shape_fn(m.ncols(), |j| {
            let var = m.column(j).iter().map(|&v| (v - mean[j]) * (v - mean[j])).sum::<T>() / n;
            var.sqrt().max(floor)
        });
        Ok(Whitener { mean, scale })
    }

    pub fn transform(&self, m: ArrayView2<T>) -> Result<Array2<T>> {
        if m.ncols() != self.mean.len() {
            return Err(Error::Invalid(format!(
                "whitener fitted on {} features, got {}",
                self.mean.len(),
                m.ncols()
            )));
        }
        Ok((&m - &self.mean) / &self.scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn l2_row() {
        let m = array![[3.0, 4.0], [0.0, 0.0]];
        assert_eq!(l2_rows(m.view()), array![[0.6, 0.8], [0.0, 0.0]]);
    }

    #[test]
    fn whiten_own_data() {
        let m = array![[1.0f64, 5.0, 2.0], [3.0, 5.0, -1.0], [8.0, 5.0, 0.5]];
        let w = Whitener::fit(m.view()).unwrap();
        let z = w.transform(m.view()).unwrap();
        for j in 0..3 {
            let c = z.column(j);
            let mean = c.mean().unwrap();
            let sd = (c.mapv(|v| (v - mean) * (v - mean)).sum() / 3.0).sqrt();
            assert!(mean.abs() < 1e-12);
            if j == 1 {
                assert!(c.iter().all(|&v| v == 0.0));
            } else {
                assert!((sd - 1.0).abs() < 1e-12);
            }
        }
    }
}
