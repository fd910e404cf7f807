//! Ridge and kernel ridge regression, target scaling and evaluation metrics.

mod krr;
mod metrics;
mod ridge;
mod scaling;

pub use krr::{kernel_dot, krr_fit, krr_fit_rows, krr_predict, KrrModel};
pub use metrics::{compute_metrics, pearson, rank_average, roc_auc, spearman, MetricReport};
pub use ridge::{ridge_fit, ridge_predict, RidgeModel};
pub use scaling::{scale_target, Direction};

/// The regularization sweep `10⁻⁹, 10⁻⁸, …, 10⁷` (17 points).
pub fn lambda_grid() -> Vec<f64> {
    (-9..=7).map(|e| format!("1e{e}").parse().expect("float literal")).collect()
}

/// Default kernel exponents.
pub const NU_CANDIDATES: [u32; 3] = [1, 2, 3];
