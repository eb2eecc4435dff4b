//! One-sided (Hestenes) Jacobi singular values.
//!
//! Column pairs are rotated until mutually orthogonal; the singular values are
//! then the column norms. The method has high relative accuracy, which the
//! compound-matrix identities rely on.

use alloc::vec::Vec;

use super::Matrix;
use crate::math;

const MAX_SWEEPS: usize = 80;

/// Column-major Jacobi iteration on `m·2^-e`; returns the rotated columns,
/// the accumulated right rotation (column-major) and `2^e`.
fn jacobi(m: &Matrix, with_v: bool) -> (Vec<f64>, Vec<f64>, f64) {
    let n = m.dim();
    // Normalize to max entry ~1 by a power of two so squares cannot overflow.
    let e = math::frexp_exponent(m.max_abs());
    let unscale = math::exp2i(e);
    let rescale = math::exp2i(-e);

    let mut cols: Vec<f64> = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cols.push(m[(i, j)] * rescale);
        }
    }
    let mut v = if with_v { Matrix::identity(n).as_slice().to_vec() } else { Vec::new() };
    let tol = f64::EPSILON * n as f64;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    let a = cols[p * n + i];
                    let b = cols[q * n + i];
                    alpha += a * a;
                    beta += b * b;
                    gamma += a * b;
                }
                if gamma == 0.0 || gamma.abs() <= tol * math::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + math::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(&mut cols, n, p, q, c, s);
                if with_v {
                    rotate(&mut v, n, p, q, c, s);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (cols, v, unscale)
}

fn rotate(cols: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..n {
        let a = cols[p * n + i];
        let b = cols[q * n + i];
        cols[p * n + i] = c * a - s * b;
        cols[q * n + i] = s * a + c * b;
    }
}

fn column_norm(col: &[f64]) -> f64 {
    col.iter().fold(0.0, |acc, &v| math::hypot(acc, v))
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let n = m.dim();
    if n == 1 {
        return alloc::vec![m[(0, 0)].abs()];
    }
    if m.max_abs() == 0.0 {
        return alloc::vec![0.0; n];
    }
    let (cols, _, unscale) = jacobi(m, false);
    let mut sv: Vec<f64> = (0..n).map(|j| column_norm(&cols[j * n..(j + 1) * n]) * unscale).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Full decomposition `m = U·diag(σ)·Vᵀ` with `σ` descending. Columns of `U`
/// belonging to zero singular values are left zero.
pub fn svd(m: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let n = m.dim();
    if m.max_abs() == 0.0 {
        return (Matrix::zeros(n), alloc::vec![0.0; n], Matrix::identity(n));
    }
    if n == 1 {
        let x = m[(0, 0)];
        return (Matrix::diagonal(&[x.signum()]), alloc::vec![x.abs()], Matrix::identity(1));
    }
    let (cols, v, unscale) = jacobi(m, true);
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| column_norm(&cols[j * n..(j + 1) * n])).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let mut u = Matrix::zeros(n);
    let mut vt = Matrix::zeros(n);
    let mut sigma = Vec::with_capacity(n);
    for (dst, &j) in order.iter().enumerate() {
        sigma.push(norms[j] * unscale);
        for i in 0..n {
            if norms[j] > 0.0 {
                u[(i, dst)] = cols[j * n + i] / norms[j];
            }
            vt[(i, dst)] = v[j * n + i];
        }
    }
    (u, sigma, vt)
}

/// Spectral (ℓ²-induced) norm: the largest singular value.
pub fn operator_norm(m: &Matrix) -> f64 {
    match m.dim() {
        1 => m[(0, 0)].abs(),
        _ => singular_values(m)[0],
    }
}
