//! Radial basis, quadrature and modified spherical Bessel functions used by
//! the density expansion.

use ndarray::Array2;

use crate::error::Result;
use crate::linalg::inverse_sqrt_spd;
use crate::scalar::Scalar;

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = T::lit(-x);
        nodes[n - 1 - i] = T::lit(x);
        weights[i] = T::lit(w);
        weights[n - 1 - i] = T::lit(w);
    }
    (nodes, weights)
}

/// `e^{−x} i_l(x)` for `l = 0..=l_max`, `x ≥ 0`.
pub fn scaled_bessel_i<T: Scalar>(l_max: usize, x: T) -> Vec<T> {
    let mut out = vec![T::zero(); l_max + 1];
    let threshold = T::from_usize((2 * l_max).max(12)).unwrap();
    if x < threshold {
        let half_x2 = x * x * T::lit(0.5);
        let ex = (-x).exp();
        let mut prefactor = T::one(); // x^l / (2l+1)!!
        for (l, slot) in out.iter_mut().enumerate() {
            if l > 0 {
                prefactor = prefactor * x / T::from_usize(2 * l + 1).unwrap();
            }
            let mut term = T::one();
            let mut sum = T::one();
            for k in 1..500 {
                term = term * half_x2 / T::from_usize(k * (2 * l + 2 * k + 1)).unwrap();
                sum += term;
                if term <= sum * T::epsilon() {
                    break;
                }
            }
            *slot = ex * prefactor * sum;
        }
    } else {
        let e2 = (-(x + x)).exp();
        out[0] = (T::one() - e2) / (x + x);
        if l_max >= 1 {
            out[1] = (T::one() + e2) / (x + x) - (T::one() - e2) / (T::lit(2.0) * x * x);
        }
        for l in 1..l_max {
            out[l + 1] = out[l - 1] - T::from_usize(2 * l + 1).unwrap() / x * out[l];
        }
    }
    out
}

/// Orthonormalized radial functions tabulated on a quadrature grid.
///
/// Primitive Gaussians of width `r_cut/n_max` centered uniformly on
/// `[0, r_cut]` are made orthonormal (weight `r²`) by symmetric (Löwdin)
/// orthogonalization.
#[derive(Debug, Clone)]
pub struct RadialBasis<T> {
    pub n_max: usize,
    pub sigma: T,
    nodes: Vec<T>,
    /// Quadrature weight times `r²`.
    weights: Vec<T>,
    /// `n_max × n_quad` values of the orthonormal functions.
    values: Array2<T>,
}

const QUADRATURE_POINTS: usize = 64;

impl<T: Scalar> RadialBasis<T> {
    pub fn new(r_cut: f64, n_max: usize, sigma: f64) -> Result<RadialBasis<T>> {
        let width = r_cut / n_max as f64;
        let centers: Vec<f64> = if n_max == 1 {
            vec![0.5 * r_cut]
        } else {
            (0..n_max).map(|k| r_cut * k as f64 / (n_max - 1) as f64).collect()
        };
        let upper = r_cut + 5.0 * width.max(sigma);
        let (gl_nodes, gl_weights) = gauss_legendre::<f64>(QUADRATURE_POINTS);
        let nodes: Vec<f64> = gl_nodes.iter().map(|t| 0.5 * upper * (t + 1.0)).collect();
        let weights: Vec<f64> = gl_weights
            .iter()
            .zip(&nodes)
            .map(|(w, r)| 0.5 * upper * w * r * r)
            .collect();
        let primitive = Array2::from_shape_fn((n_max, QUADRATURE_POINTS), |(k, q)| {
            let d = nodes[q] - centers[k];
            (-d * d / (2.0 * width * width)).exp()
        });
        let mut overlap = Array2::<f64>::zeros((n_max, n_max));
        for a in 0..n_max {
            for b in 0..n_max {
                overlap[[a, b]] = (0..QUADRATURE_POINTS)
                    .map(|q| weights[q] * primitive[[a, q]] * primitive[[b, q]])
                    .sum();
            }
        }
        let transform = inverse_sqrt_spd(overlap.view())?;
        let values = transform.dot(&primitive);
        Ok(RadialBasis {
            n_max,
            sigma: T::lit(sigma),
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
            values: values.mapv(T::lit),
        })
    }

    /// `∫ r² g_n(r) e^{−(r−d)²/2σ²} e^{−x} i_l(x) dr` with `x = r d / σ²`,
    /// returned as an `n_max × (l_max+1)` table.
    pub fn integrals(&self, distance: T, l_max: usize) -> Array2<T> {
        let s2 = self.sigma * self.sigma;
        let mut out = Array2::<T>::zeros((self.n_max, l_max + 1));
        for (q, (&r, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let d = r - distance;
            let gauss = (-(d * d) / (s2 + s2)).exp();
            if gauss == T::zero() {
                continue;
            }
            let bessel = scaled_bessel_i(l_max, r * distance / s2);
            for n in 0..self.n_max {
                let f = w * self.values[[n, q]] * gauss;
                for l in 0..=l_max {
                    out[[n, l]] += f * bessel[l];
                }
            }
        }
        out
    }

    /// Overlap matrix of the tabulated functions; identity up to quadrature error.
    pub fn gram(&self) -> Array2<T> {
        let n = self.n_max;
        Array2::from_shape_fn((n, n), |(a, b)| {
            (0..self.nodes.len())
                .map(|q| self.weights[q] * self.values[[a, q]] * self.values[[b, q]])
                .sum()
        })
    }
}
