//! Real spherical harmonics.

use crate::scalar::Scalar;

/// Flat index of `(l, m)` in a table ordered by `l`, then `m = −l..=l`.
#[inline]
pub fn lm_index(l: usize, m: i64) -> usize {
    l * l + (l as i64 + m) as usize
}

/// Real orthonormal spherical harmonics `Y_lm(û)` for `l ≤ l_max`.
///
/// `u` need not be normalized; a zero vector is treated as the +z direction.
pub fn real_spherical_harmonics<T: Scalar>(l_max: usize, u: [T; 3]) -> Vec<T> {
    let r = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let (x, y, z) = if r > T::zero() {
        (u[0] / r, u[1] / r, u[2] / r)
    } else {
        (T::zero(), T::zero(), T::one())
    };
    let size = (l_max + 1) * (l_max + 1);
    let mut out = vec![T::zero(); size];

    // cos(mφ)·sin^m θ and sin(mφ)·sin^m θ as polynomials in x, y
    let mut cm = vec![T::one(); l_max + 1];
    let mut sm = vec![T::zero(); l_max + 1];
    for m in 1..=l_max {
        cm[m] = x * cm[m - 1] - y * sm[m - 1];
        sm[m] = x * sm[m - 1] + y * cm[m - 1];
    }

    let four_pi = T::lit(4.0 * std::f64::consts::PI);
    let sqrt2 = T::lit(std::f64::consts::SQRT_2);
    for m in 0..=l_max {
        // Q_l^m(z) = P_l^m(z) / sin^m θ, built upward in l
        let mut q_mm = T::one();
        for k in 1..=m {
            q_mm *= T::from_usize(2 * k - 1).unwrap();
        }
        let mut q_prev = T::zero();
        let mut q = q_mm;
        for l in m..=l_max {
            if l == m + 1 {
                q_prev = q;
                q = z * T::from_usize(2 * m + 1).unwrap() * q_mm;
            } else if l > m + 1 {
                let next = (T::from_usize(2 * l - 1).unwrap() * z * q - T::from_usize(l + m - 1).unwrap() * q_prev)
                    / T::from_usize(l - m).unwrap();
                q_prev = q;
                q = next;
            }
            // (l−m)!/(l+m)!
            let mut ratio = 1.0f64;
            for k in (l - m + 1)..=(l + m) {
                ratio /= k as f64;
            }
            let norm = (T::from_usize(2 * l + 1).unwrap() / four_pi * T::lit(ratio)).sqrt();
            if m == 0 {
                out[lm_index(l, 0)] = norm * q;
            } else {
                out[lm_index(l, m as i64)] = sqrt2 * norm * q * cm[m];
                out[lm_index(l, -(m as i64))] = sqrt2 * norm * q * sm[m];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre(l: usize, x: f64) -> f64 {
        let (mut p0, mut p1) = (1.0, x);
        if l == 0 {
            return 1.0;
        }
        for k in 1..l {
            let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    #[test]
    fn addition_theorem() {
        let u = [0.3, -0.5, 0.81];
        let v = [-0.7, 0.2, 0.4];
        let ya = real_spherical_harmonics(6, u);
        let yb = real_spherical_harmonics(6, v);
        let nu = (u.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let nv = (v.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let cos = u.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / (nu * nv);
        for l in 0..=6usize {
            let s: f64 = (-(l as i64)..=l as i64).map(|m| ya[lm_index(l, m)] * yb[lm_index(l, m)]).sum();
            let want = (2 * l + 1) as f64 / (4.0 * std::f64::consts::PI) * legendre(l, cos);
            assert!((s - want).abs() < 1e-12, "l={l}: {s} vs {want}");
        }
    }

    #[test]
    fn z_axis_has_only_m_zero() {
        let y = real_spherical_harmonics(5, [0.0, 0.0, 2.0]);
        for l in 0..=5usize {
            for m in -(l as i64)..=l as i64 {
                if m != 0 {
                    assert_eq!(y[lm_index(l, m)], 0.0);
                }
            }
            let want = ((2 * l + 1) as f64 / (4.0 * std::f64::consts::PI)).sqrt();
            assert!((y[lm_index(l, 0)] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn orthonormal_under_quadrature() {
        // product Gauss-Legendre (cos θ) × uniform (φ) quadrature
        let (nodes, weights) = crate::descriptors::radial::gauss_legendre::<f64>(24);
        let nphi = 48;
        let lmax = 4;
        let size = (lmax + 1) * (lmax + 1);
        let mut gram = vec![vec![0.0; size]; size];
        for (ct, w) in nodes.iter().zip(&weights) {
            let st = (1.0 - ct * ct).sqrt();
            for k in 0..nphi {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / nphi as f64;
                let y = real_spherical_harmonics(lmax, [st * phi.cos(), st * phi.sin(), *ct]);
                let dw = w * 2.0 * std::f64::consts::PI / nphi as f64;
                for a in 0..size {
                    for b in 0..size {
                        gram[a][b] += dw * y[a] * y[b];
                    }
                }
            }
        }
        for a in 0..size {
            for b in 0..size {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((gram[a][b] - want).abs() < 1e-12, "({a},{b}) = {}", gram[a][b]);
            }
        }
    }
}
