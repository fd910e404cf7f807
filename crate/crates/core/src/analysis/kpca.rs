use ndarray::{Array1, Array2, ArrayView2};

use super::similarity::SimilarityKernel;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// Low-dimensional embedding of a kernel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KpcaMap {
    pub labels: Vec<String>,
    /// m × c, one row per label.
    pub coordinates: Array2<f64>,
    /// Descending and clamped at zero.
    pub eigenvalues: Array1<f64>,
}

/// Subtracts row and column means and adds back the grand mean.
pub fn center_kernel(k: ArrayView2<f64>) -> Array2<f64> {
    let m = k.nrows() as f64;
    let rows: Vec<f64> = k.rows().into_iter().map(|r| r.sum() / m).collect();
    let cols: Vec<f64> = k.columns().into_iter().map(|c| c.sum() / m).collect();
    let grand = rows.iter().sum::<f64>() / m;
    Array2::from_shape_fn(k.dim(), |(i, j)| k[[i, j]] - rows[i] - cols[j] + grand)
}

pub fn kpca(kernel: &SimilarityKernel, components: usize) -> Result<KpcaMap> {
    let m = kernel.len();
    if kernel.k.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("kernel has non-finite entries; drop flagged labels first".into()));
    }
    if components == 0 || components + 1 > m {
        return Err(Error::Invalid(format!(
            "cannot extract {components} components from a {m}x{m} kernel"
        )));
    }
    let centered = center_kernel(kernel.k.view());
    let eig = symmetric_eigen(centered.view())?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.values[b].total_cmp(&eig.values[a]).then(a.cmp(&b)));
    let scale = eig.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    if eig.values[order[0]] <= 1e-12 * scale {
        return Err(Error::Numerical("degenerate kernel".into()));
    }
    let mut coordinates = Array2::zeros((m, components));
    let mut eigenvalues = Array1::zeros(components);
    for (c, &idx) in order.iter().take(components).enumerate() {
        let lambda = eig.values[idx].max(0.0);
        eigenvalues[c] = lambda;
        let v = eig.vectors.column(idx);
        let pivot = v.iter().enumerate().fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        let root = lambda.sqrt();
        for i in 0..m {
            coordinates[[i, c]] = sign * v[i] * root;
        }
    }
    Ok(KpcaMap {
        labels: kernel.labels.clone(),
        coordinates,
        eigenvalues,
    })
}
