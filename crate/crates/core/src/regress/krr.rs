use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::ridge::check_finite;
use crate::error::{Error, Result};
use crate::linalg::solve_spd_shifted;
use crate::scalar::Scalar;

/// Dot-product kernel `K[a,b] = (x1_a · x2_b)^ν`.
pub fn kernel_dot<T: Scalar>(x1: ArrayView2<T>, x2: ArrayView2<T>, nu: u32) -> Result<Array2<T>> {
    if x1.ncols() != x2.ncols() {
        return Err(Error::Invalid(format!(
            "kernel: dimension mismatch ({} vs {} columns)",
            x1.ncols(),
            x2.ncols()
        )));
    }
    if nu == 0 {
        return Err(Error::Invalid("kernel exponent must be >= 1".into()));
    }
    let mut k = x1.dot(&x2.t());
    if nu > 1 {
        k.mapv_inplace(|v| v.powi(nu as i32));
    }
    Ok(k)
}

/// Kernel ridge regression in dual form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrrModel<T> {
    pub alpha: Array1<T>,
    pub intercept: T,
    pub lambda: T,
    pub nu: u32,
    /// Training rows, kept when the model should build its own test kernels.
    pub train_rows: Option<Array2<T>>,
}

/// `α = (K + λI)⁻¹ (y − ȳ)`, intercept `ȳ`.
pub fn krr_fit<T: Scalar>(k_train: ArrayView2<T>, y: ArrayView1<T>, lambda: T) -> Result<KrrModel<T>> {
    let n = k_train.nrows();
    if k_train.ncols() != n {
        return Err(Error::Invalid(format!("krr: kernel is {}x{}, not square", n, k_train.ncols())));
    }
    if y.len() != n || n == 0 {
        return Err(Error::Invalid(format!("krr: {n} kernel rows but {} targets", y.len())));
    }
    if !(lambda > T::zero()) {
        return Err(Error::Invalid("krr: lambda must be positive".into()));
    }
    check_finite(k_train.iter().copied(), "kernel matrix")?;
    check_finite(y.iter().copied(), "targets")?;
    let scale = k_train.iter().fold(T::zero(), |m, v| m.max(v.abs())).max(T::one());
    for i in 0..n {
        for j in (i + 1)..n {
            if (k_train[[i, j]] - k_train[[j, i]]).abs() > T::lit(1e-8) * scale {
                return Err(Error::Invalid(format!("krr: kernel not symmetric at ({i}, {j})")));
            }
        }
    }
    let y_mean = y.mean().expect("n > 0");
    let yc = &y - y_mean;
    let alpha = solve_spd_shifted(k_train, lambda, yc.view())?;
    Ok(KrrModel {
        alpha,
        intercept: y_mean,
        lambda,
        nu: 1,
        train_rows: None,
    })
}

/// Fits on training rows directly, keeping them for later prediction.
pub fn krr_fit_rows<T: Scalar>(x_train: ArrayView2<T>, y: ArrayView1<T>, lambda: T, nu: u32) -> Result<KrrModel<T>> {
    let k = kernel_dot(x_train, x_train, nu)?;
    let mut model = krr_fit(k.view(), y, lambda)?;
    model.nu = nu;
    model.train_rows = Some(x_train.to_owned());
    Ok(model)
}

/// `K_test,train · α + intercept`.
pub fn krr_predict<T: Scalar>(model: &KrrModel<T>, k_test_train: ArrayView2<T>) -> Result<Array1<T>> {
    if k_test_train.ncols() != model.alpha.len() {
        return Err(Error::Invalid(format!(
            "krr: kernel has {} columns but model has {} training samples",
            k_test_train.ncols(),
            model.alpha.len()
        )));
    }
    Ok(k_test_train.dot(&model.alpha) + model.intercept)
}

impl<T: Scalar> KrrModel<T> {
    pub fn predict(&self, k_test_train: ArrayView2<T>) -> Result<Array1<T>> {
        krr_predict(self, k_test_train)
    }

    /// Predicts from raw rows; requires a model fitted with [`krr_fit_rows`].
    pub fn predict_rows(&self, x: ArrayView2<T>) -> Result<Array1<T>> {
        let train = self
            .train_rows
            .as_ref()
            .ok_or_else(|| Error::Invalid("krr: model holds no training rows".into()))?;
        let k = kernel_dot(x, train.view(), self.nu)?;
        krr_predict(self, k.view())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn unit_rows_have_unit_diagonal() {
        let x = array![[0.6f64, 0.8], [1.0, 0.0], [0.0, 1.0]];
        for nu in 1..=3 {
            let k = kernel_dot(x.view(), x.view(), nu).unwrap();
            for i in 0..3 {
                assert!((k[[i, i]] - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn higher_exponents_are_elementwise_powers() {
        let x = array![[0.2, 0.5, 0.1], [0.7, 0.3, 0.9]];
        let y = array![[0.4, 0.4, 0.4], [0.0, 1.0, 0.5]];
        let k1 = kernel_dot(x.view(), y.view(), 1).unwrap();
        assert_eq!(k1, x.dot(&y.t()));
        let k2 = kernel_dot(x.view(), y.view(), 2).unwrap();
        assert_eq!(k2, k1.mapv(|v| v * v));
    }

    #[test]
    fn dimension_mismatch() {
        let a = array![[1.0, 2.0]];
        let b = array![[1.0, 2.0, 3.0]];
        assert!(kernel_dot(a.view(), b.view(), 1).is_err());
    }

    #[test]
    fn interpolates_training_labels() {
        let x = array![[1.0f64, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let y = array![1.0, -2.0, 4.0];
        let m = krr_fit_rows(x.view(), y.view(), 1e-9, 1).unwrap();
        let p = m.predict_rows(x.row(1).insert_axis(ndarray::Axis(0))).unwrap();
        assert!((p[0] + 2.0).abs() < 1e-6, "{p}");
    }

    #[test]
    fn heavy_regularization_predicts_the_mean() {
        let x = array![[1.0f64, 0.5], [0.2, 0.9], [0.4, 0.4]];
        let y = array![3.0, 6.0, 0.0];
        let m = krr_fit_rows(x.view(), y.view(), 1e7, 2).unwrap();
        let p = m.predict_rows(x.view()).unwrap();
        assert!(p.iter().all(|v| (v - 3.0).abs() < 1e-5));
    }

    #[test]
    fn asymmetric_kernel_rejected() {
        let k = array![[1.0, 0.5], [0.4, 1.0]];
        assert!(krr_fit(k.view(), array![1.0, 2.0].view(), 1.0).is_err());
    }
}
