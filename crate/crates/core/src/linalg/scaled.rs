//! Matrices carried as `mantissa · 2^exponent` so long products stay in range.

use super::{operator_norm, Matrix};
use crate::math;

const HIGH: i32 = 900;
const LOW: i32 = -900;
const EIGEN_RANGE: i32 = 300;

/// A matrix `m · 2^e`. The mantissa is rescaled by exact powers of two only
/// when its largest entry leaves `[2^-900, 2^900]`, so products that stay in
/// range are bit-identical to plain multiplication.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledMatrix {
    mantissa: Matrix,
    exponent: i64,
}

impl ScaledMatrix {
    pub fn identity(dim: usize) -> Self {
        Self { mantissa: Matrix::identity(dim), exponent: 0 }
    }

    pub fn new(m: Matrix) -> Self {
        let mut s = Self { mantissa: m, exponent: 0 };
        s.renormalize();
        s
    }

    pub fn mantissa(&self) -> &Matrix {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    /// `(m, e)` with `m · 2^e = self` and the largest entry of `m` in
    /// `[1/2, 1)`, ready for algorithms that square entries.
    pub fn balanced(&self) -> (Matrix, i64) {
        let max = self.mantissa.max_abs();
        if max == 0.0 || !max.is_finite() {
            return (self.mantissa.clone(), self.exponent);
        }
        let e = math::frexp_exponent(max);
        let mut m = self.mantissa.clone();
        m.scale_pow2(-e);
        (m, self.exponent + e as i64)
    }

    /// `(m, e)` with `m · 2^e = self`, shifted by the least power of two that
    /// brings the largest entry into `[2^-300, 2^300]`. Eigenvalue routines
    /// square entries; a minimal shift keeps the small entries, which can
    /// carry the spectral radius of nearly nilpotent monodromies, in range.
    pub fn eigen_ready(&self) -> (Matrix, i64) {
        let max = self.mantissa.max_abs();
        if max == 0.0 || !max.is_finite() {
            return (self.mantissa.clone(), self.exponent);
        }
        let e = math::frexp_exponent(max);
        let shift = if e > EIGEN_RANGE {
            e - EIGEN_RANGE
        } else if e < -EIGEN_RANGE {
            e + EIGEN_RANGE
        } else {
            0
        };
        let mut m = self.mantissa.clone();
        m.scale_pow2(-shift);
        (m, self.exponent + shift as i64)
    }

    /// `self <- a · self`.
    pub fn left_mul(&mut self, a: &Matrix) {
        let mut next = a.matmul(&self.mantissa);
        if !next.is_finite() {
            // rare: pull the mantissa down first
            let e = math::frexp_exponent(self.mantissa.max_abs());
            self.mantissa.scale_pow2(-e);
            self.exponent += e as i64;
            next = a.matmul(&self.mantissa);
        }
        self.mantissa = next;
        self.renormalize();
    }

    fn renormalize(&mut self) {
        let max = self.mantissa.max_abs();
        if max == 0.0 || !max.is_finite() {
            return;
        }
        let e = math::frexp_exponent(max);
        if !(LOW..=HIGH).contains(&e) {
            self.mantissa.scale_pow2(-e);
            self.exponent += e as i64;
        }
    }

    /// `ln ‖self‖`, `-∞` for the zero matrix.
    pub fn log_operator_norm(&self) -> f64 {
        let n = operator_norm(&self.mantissa);
        if n == 0.0 {
            f64::NEG_INFINITY
        } else {
            math::ln(n) + self.exponent as f64 * core::f64::consts::LN_2
        }
    }

    /// The plain matrix, if it is representable.
    pub fn to_matrix(&self) -> Option<Matrix> {
        let mut m = self.mantissa.clone();
        let mut e = self.exponent;
        while e != 0 {
            let step = e.clamp(-1000, 1000) as i32;
            m.scale_pow2(step);
            e -= step as i64;
        }
        let underflowed = m.max_abs() == 0.0 && self.mantissa.max_abs() != 0.0;
        (m.is_finite() && !underflowed).then_some(m)
    }
}
