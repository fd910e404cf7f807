use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_spd_shifted;
use crate::scalar::Scalar;

/// Linear model `y = X·w + intercept` fitted by ridge regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel<T> {
    pub weights: Array1<T>,
    pub intercept: T,
    pub lambda: T,
}

pub(crate) fn check_finite<T: Scalar>(values: impl IntoIterator<Item = T>, what: &str) -> Result<()> {
    if values.into_iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("non-finite entry in {what}")))
    }
}

/// Minimizes `½‖X̃w − ỹ‖² + ½λ‖w‖²` on column-centered `X̃` and centered `ỹ`.
///
/// The normal equations are solved in primal form (`d×d`) when `d ≤ n` and in
/// the equivalent dual form `w = X̃ᵀ(X̃X̃ᵀ + λI)⁻¹ỹ` otherwise. The means
/// are folded into the intercept.
pub fn ridge_fit<T: Scalar>(x: ArrayView2<T>, y: ArrayView1<T>, lambda: T) -> Result<RidgeModel<T>> {
    let (n, d) = x.dim();
    if n == 0 {
        return Err(Error::Invalid("ridge: no training samples".into()));
    }
    if y.len() != n {
        return Err(Error::Invalid(format!("ridge: {n} rows but {} targets", y.len())));
    }
    if !(lambda > T::zero()) {
        return Err(Error::Invalid("ridge: lambda must be positive".into()));
    }
    check_finite(x.iter().copied(), "design matrix")?;
    check_finite(y.iter().copied(), "targets")?;

    let x_mean = x.mean_axis(Axis(0)).expect("n > 0");
    let y_mean = y.mean().expect("n > 0");
    let xc = &x - &x_mean;
    let yc = &y - y_mean;
    let weights = if d <= n {
        let gram = xc.t().dot(&xc);
        let rhs = xc.t().dot(&yc);
        solve_spd_shifted(gram.view(), lambda, rhs.view())?
    } else {
        let gram = xc.dot(&xc.t());
        let dual = solve_spd_shifted(gram.view(), lambda, yc.view())?;
        xc.t().dot(&dual)
    };
    let intercept = y_mean - x_mean.dot(&weights);
    Ok(RidgeModel {
        weights,
        intercept,
        lambda,
    })
}

impl<T: Scalar> RidgeModel<T> {
    pub fn predict(&self, x: ArrayView2<T>) -> Result<Array1<T>> {
        ridge_predict(self, x)
    }
}

pub fn ridge_predict<T: Scalar>(model: &RidgeModel<T>, x: ArrayView2<T>) -> Result<Array1<T>> {
    if x.ncols() != model.weights.len() {
        return Err(Error::Invalid(format!(
            "ridge: model has {} weights but input has {} columns",
            model.weights.len(),
            x.ncols()
        )));
    }
    Ok(x.dot(&model.weights) + model.intercept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn two_point_hand_solution() {
        // centered x = (−½, ½), y = (−½, ½): w = ½ / (½ + 1) = 1/3
        let x = array![[0.0f64], [1.0]];
        let y = array![0.0, 1.0];
        let m = ridge_fit(x.view(), y.view(), 1.0).unwrap();
        assert!((m.weights[0] - 1.0 / 3.0).abs() < 1e-15);
        let p = m.predict(array![[1.0]].view()).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identity_design_recovers_centered_targets() {
        let x = Array2::<f64>::eye(4);
        let y = array![1.0, -2.0, 0.5, 3.0];
        let m = ridge_fit(x.view(), y.view(), 1e-9).unwrap();
        let yc = &y - y.mean().unwrap();
        for (w, t) in m.weights.iter().zip(yc.iter()) {
            assert!((w - t).abs() < 1e-6);
        }
    }

    #[test]
    fn heavy_regularization_predicts_the_mean() {
        let x = array![[0.1f64, 0.3], [0.4, -0.2], [0.9, 0.5], [-0.3, 0.8]];
        let y = array![1.0, 2.0, 3.0, 6.0];
        let m = ridge_fit(x.view(), y.view(), 1e7).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-6));
        let p = m.predict(x.view()).unwrap();
        assert!(p.iter().all(|v| (v - 3.0).abs() < 1e-5));
    }

    #[test]
    fn zero_input_gives_intercept() {
        let x = array![[1.0, 2.0], [2.0, 1.0], [0.5, 0.5]];
        let y = array![1.0, 2.0, 0.0];
        let m = ridge_fit(x.view(), y.view(), 0.1).unwrap();
        let p = m.predict(Array2::zeros((2, 2)).view()).unwrap();
        assert_eq!(p[0], m.intercept);
        assert_eq!(p[1], m.intercept);
    }

    #[test]
    fn primal_and_dual_branches_agree() {
        // d > n takes the dual branch
        let x = array![[1.0f64, 0.2, -0.3, 0.7], [0.4, -1.0, 0.5, 0.1], [0.3, 0.3, 0.9, -0.6]];
        let y = array![0.5, -1.0, 2.0];
        let dual = ridge_fit(x.view(), y.view(), 0.3).unwrap();
        let xc = &x - &x.mean_axis(Axis(0)).unwrap();
        let yc = &y - y.mean().unwrap();
        let gram = xc.t().dot(&xc);
        let primal = solve_spd_shifted(gram.view(), 0.3, xc.t().dot(&yc).view()).unwrap();
        for (a, b) in dual.weights.iter().zip(primal.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let x = array![[1.0], [f64::NAN]];
        let y = array![1.0, 2.0];
        assert!(ridge_fit(x.view(), y.view(), 1.0).is_err());
        let x = array![[1.0], [2.0]];
        assert!(ridge_fit(x.view(), y.view(), 0.0).is_err());
    }

    #[test]
    fn single_precision_fit() {
        let x = array![[0.0f32], [1.0], [2.0]];
        let y = array![1.0f32, 3.0, 5.0];
        let m = ridge_fit(x.view(), y.view(), 1e-6).unwrap();
        assert!((m.weights[0] - 2.0).abs() < 1e-3);
        assert!((m.intercept - 1.0).abs() < 1e-3);
    }
}
