//! Small dense symmetric matrix helpers on row-major `p × p` slices.
//!
//! The scan inner loops only ever see `p × p` systems with `p` in the single
//! digits, so Cholesky and the explicit inverse are hand-rolled on slices;
//! eigendecompositions go through `nalgebra`.

use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// Reciprocal condition number below which a matrix is treated as singular.
pub const RCOND_THRESHOLD: f64 = 1e-12;

/// In-place lower Cholesky factor; returns `false` if `a` is not positive
/// definite. The strict upper triangle is zeroed.
pub fn cholesky_in_place(a: &mut [f64], p: usize) -> bool {
    for j in 0..p {
        let mut d = a[j * p + j];
        for k in 0..j {
            d -= a[j * p + k] * a[j * p + k];
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        a[j * p + j] = d;
        for i in (j + 1)..p {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= a[i * p + k] * a[j * p + k];
            }
            a[i * p + j] = s / d;
        }
        for k in (j + 1)..p {
            a[j * p + k] = 0.0;
        }
    }
    true
}

fn norm_1(a: &[f64], p: usize) -> f64 {
    (0..p)
        .map(|j| (0..p).map(|i| a[i * p + j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse of a symmetric positive definite matrix, or `None` when it is not
/// positive definite or its 1-norm reciprocal condition is below
/// [`RCOND_THRESHOLD`].
pub fn spd_inverse(a: &[f64], p: usize) -> Option<Vec<f64>> {
    let mut l = a.to_vec();
    if !cholesky_in_place(&mut l, p) {
        return None;
    }
    // L⁻¹ by forward substitution, then A⁻¹ = L⁻ᵀ L⁻¹.
    let mut linv = alloc::vec![0.0; p * p];
    for j in 0..p {
        linv[j * p + j] = 1.0 / l[j * p + j];
        for i in (j + 1)..p {
            let mut s = 0.0;
            for k in j..i {
                s -= l[i * p + k] * linv[k * p + j];
            }
            linv[i * p + j] = s / l[i * p + i];
        }
    }
    let mut inv = alloc::vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut s = 0.0;
            for k in i..p {
                s += linv[k * p + i] * linv[k * p + j];
            }
            inv[i * p + j] = s;
            inv[j * p + i] = s;
        }
    }
    let rcond = 1.0 / (norm_1(a, p) * norm_1(&inv, p));
    if rcond.is_finite() && rcond >= RCOND_THRESHOLD {
        Some(inv)
    } else {
        None
    }
}

/// `trace(A B)` for row-major `p × p` matrices.
pub fn trace_of_product(a: &[f64], b: &[f64], p: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..p {
        for k in 0..p {
            s += a[i * p + k] * b[k * p + i];
        }
    }
    s
}

/// `xᵀ A x`.
#[inline]
pub fn quadratic_form(a: &[f64], x: &[f64]) -> f64 {
    let p = x.len();
    let mut s = 0.0;
    for i in 0..p {
        let mut r = 0.0;
        for j in 0..p {
            r += a[i * p + j] * x[j];
        }
        s += x[i] * r;
    }
    s
}

/// Row-major `A B` for square matrices.
pub fn mat_mul(a: &[f64], b: &[f64], p: usize) -> Vec<f64> {
    let mut out = alloc::vec![0.0; p * p];
    for i in 0..p {
        for k in 0..p {
            let aik = a[i * p + k];
            for j in 0..p {
                out[i * p + j] += aik * b[k * p + j];
            }
        }
    }
    out
}

/// `A x`.
pub fn mat_vec(a: &[f64], x: &[f64], out: &mut [f64]) {
    let p = x.len();
    for i in 0..p {
        let mut s = 0.0;
        for j in 0..p {
            s += a[i * p + j] * x[j];
        }
        out[i] = s;
    }
}

/// `S^{-1/2}` of a symmetric positive definite matrix via its eigen
/// decomposition, or `None` if the smallest eigenvalue is not above
/// `RCOND_THRESHOLD` times the largest.
pub fn inverse_sqrt_symmetric(a: &[f64], p: usize) -> Option<Vec<f64>> {
    let m = DMatrix::from_fn(p, p, |i, j| 0.5 * (a[i * p + j] + a[j * p + i]));
    let eig = m.symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || !(min > RCOND_THRESHOLD * max) {
        return None;
    }
    let v = &eig.eigenvectors;
    let mut out = alloc::vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            let mut s = 0.0;
            for k in 0..p {
                s += v[(i, k)] * v[(j, k)] / eig.eigenvalues[k].sqrt();
            }
            out[i * p + j] = s;
        }
    }
    Some(out)
}

pub fn determinant(a: &[f64], p: usize) -> f64 {
    DMatrix::from_row_slice(p, p, a).determinant()
}

/// Frobenius norm.
pub fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn inverse_of_spd() {
        let a = vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let inv = spd_inverse(&a, 3).unwrap();
        let prod = mat_mul(&a, &inv, 3);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[i * 3 + j] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_and_ill_conditioned_rejected() {
        assert!(spd_inverse(&[1.0, 1.0, 1.0, 1.0], 2).is_none());
        assert!(spd_inverse(&[0.0, 0.0, 0.0, 0.0], 2).is_none());
        assert!(spd_inverse(&[1.0, 0.0, 0.0, 1e-14], 2).is_none());
        assert!(spd_inverse(&[1.0, 0.0, 0.0, 1e-9], 2).is_some());
    }

    #[test]
    fn inverse_sqrt_squares_to_inverse() {
        let a = vec![5.0, 2.0, 2.0, 3.0];
        let r = inverse_sqrt_symmetric(&a, 2).unwrap();
        let rr = mat_mul(&r, &r, 2);
        let inv = spd_inverse(&a, 2).unwrap();
        for (x, y) in rr.iter().zip(&inv) {
            assert!((x - y).abs() < 1e-13);
        }
        assert!(inverse_sqrt_symmetric(&[1.0, 1.0, 1.0, 1.0], 2).is_none());
    }

    #[test]
    fn small_helpers() {
        let a = [2.0, 1.0, 1.0, 3.0];
        assert_eq!(quadratic_form(&a, &[1.0, 2.0]), 2.0 + 4.0 + 12.0);
        assert_eq!(trace_of_product(&a, &[1.0, 0.0, 0.0, 1.0], 2), 5.0);
        assert!((determinant(&a, 2) - 5.0).abs() < 1e-14);
    }
}
