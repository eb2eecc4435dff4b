//! Householder QR used by the reorthonormalized (Benettin) estimator.

use alloc::vec::Vec;

use super::Matrix;
use crate::math;

/// Factors `m = Q·R`; returns `Q` and the diagonal of `R`.
pub fn householder_qr(m: &Matrix) -> (Matrix, Vec<f64>) {
    let n = m.dim();
    let mut r = m.clone();
    let mut q = Matrix::identity(n);
    let mut v = alloc::vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let norm = (k..n).fold(0.0, |acc, i| math::hypot(acc, r[(i, k)]));
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[(k, k)] > 0.0 { -norm } else { norm };
        for i in 0..n {
            v[i] = if i < k { 0.0 } else { r[(i, k)] };
        }
        v[k] -= alpha;
        let vnorm2: f64 = v[k..].iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // R <- (I - 2vv'/v'v) R
        for j in k..n {
            let dot: f64 = (k..n).map(|i| v[i] * r[(i, j)]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..n {
                r[(i, j)] -= f * v[i];
            }
        }
        // Q <- Q (I - 2vv'/v'v)
        for i in 0..n {
            let dot: f64 = (k..n).map(|j| q[(i, j)] * v[j]).sum();
            let f = 2.0 * dot / vnorm2;
            for j in k..n {
                q[(i, j)] -= f * v[j];
            }
        }
    }
    let diag = (0..n).map(|i| r[(i, i)]).collect();
    (q, diag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs() {
        let m = Matrix::from_rows(&[[1.0, 2.0, 0.5], [-1.0, 0.3, 2.0], [4.0, 1.0, 1.0]]).unwrap();
        let (q, diag) = householder_qr(&m);
        // Q orthogonal
        let qtq = &q.transpose() * &q;
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[(i, j)] - e).abs() < 1e-14);
            }
        }
        // Q^T m is upper triangular with the reported diagonal
        let r = &q.transpose() * &m;
        for i in 0..3 {
            assert!((r[(i, i)] - diag[i]).abs() < 1e-13);
            for j in 0..i {
                assert!(r[(i, j)].abs() < 1e-13);
            }
        }
        let prod: f64 = diag.iter().product();
        assert!((prod.abs() - m.determinant().abs()).abs() < 1e-12);
    }
}
