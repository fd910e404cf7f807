//! Small dense linear algebra: Cholesky solves with jitter escalation and a
//! cyclic Jacobi eigensolver. Sizes here are at most a few hundred, so
//! straightforward O(n³) routines are adequate.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky<T: Scalar>(a: ArrayView2<T>) -> Option<Array2<T>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut l = Array2::<T>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / d;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` given the lower factor.
pub fn cholesky_solve<T: Scalar>(l: &Array2<T>, b: ArrayView1<T>) -> Array1<T> {
    let n = l.nrows();
    let mut y = b.to_owned();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    y
}

/// Solves `(A + shift·I) x = b` for symmetric `A`.
///
/// If the factorization fails, a diagonal jitter of `1e-12·trace/n` is added
/// and multiplied by ten on each of up to three retries.
pub fn solve_spd_shifted<T: Scalar>(a: ArrayView2<T>, shift: T, b: ArrayView1<T>) -> Result<Array1<T>> {
    let n = a.nrows();
    if n != a.ncols() || n != b.len() {
        return Err(Error::Invalid(format!(
            "solve: matrix {}x{} incompatible with rhs of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if n == 0 {
        return Ok(Array1::zeros(0));
    }
    let trace: T = (0..n).map(|i| a[[i, i]]).sum();
    let base_jitter = T::lit(1e-12) * (trace.abs() / T::from_usize(n).unwrap()).max(T::min_positive_value());
    let mut work = a.to_owned();
    for i in 0..n {
        work[[i, i]] += shift;
    }
    let mut jitter = T::zero();
    for attempt in 0..4 {
        if attempt > 0 {
            let next = if attempt == 1 { base_jitter } else { jitter * T::lit(10.0) };
            for i in 0..n {
                work[[i, i]] += next - jitter;
            }
            jitter = next;
        }
        if let Some(l) = cholesky(work.view()) {
            let x = cholesky_solve(&l, b);
            if x.iter().all(|v| v.is_finite()) {
                if attempt > 0 {
                    log::debug!("cholesky succeeded after {attempt} jitter escalation(s)");
                }
                return Ok(x);
            }
        }
    }
    Err(Error::Numerical(format!(
        "symmetric solve failed for {n}x{n} system after jitter escalation"
    )))
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    /// Eigenvalues in no particular order.
    pub values: Array1<T>,
    /// Eigenvectors stored as columns, matching `values`.
    pub vectors: Array2<T>,
}

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
pub fn symmetric_eigen<T: Scalar>(a: ArrayView2<T>) -> Result<SymmetricEigen<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Invalid("eigen: matrix is not square".into()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("eigen: non-finite matrix entry".into()));
    }
    let mut m = a.to_owned();
    // symmetrize against round-off in the caller
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (m[[i, j]] + m[[j, i]]) * T::lit(0.5);
            m[[i, j]] = avg;
            m[[j, i]] = avg;
        }
    }
    let mut v = Array2::<T>::eye(n);
    let total: T = m.iter().map(|x| *x * *x).sum();
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[[i, j]] * m[[i, j]];
            }
        }
        if off <= eps * eps * total || off == T::zero() {
            return Ok(SymmetricEigen {
                values: (0..n).map(|i| m[[i, i]]).collect(),
                vectors: v,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == T::zero() {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::Numerical(format!("Jacobi eigensolver did not converge for {n}x{n} matrix")))
}

/// `S^{-1/2}` of a symmetric positive-definite matrix.
pub fn inverse_sqrt_spd<T: Scalar>(s: ArrayView2<T>) -> Result<Array2<T>> {
    let eig = symmetric_eigen(s)?;
    let n = s.nrows();
    let mut out = Array2::<T>::zeros((n, n));
    for (k, &lam) in eig.values.iter().enumerate() {
        if !(lam > T::zero()) {
            return Err(Error::Numerical("matrix is not positive definite".into()));
        }
        let f = T::one() / lam.sqrt();
        let col = eig.vectors.column(k);
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] += f * col[i] * col[j];
            }
        }
    }
    Ok(out)
}
