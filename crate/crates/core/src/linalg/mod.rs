//! Dense small-matrix algebra: operator norms, singular values, exterior
//! powers, eigenvalues and the scalar `log⁺`/`log⁻` helpers.

mod eigen;
mod exterior;
mod matrix;
mod qr;
mod scaled;
mod svd;

pub use eigen::{eigenvalues, spectral_radius, Eigenvalue};
pub use exterior::{binomial, exterior_power, k_subsets, CompoundMatrix, COFACTOR_MAX_DIM};
pub use matrix::{Matrix, DEGENERATE_DET};
pub use qr::householder_qr;
pub use scaled::ScaledMatrix;
pub use svd::{operator_norm, singular_values, svd};

use crate::error::{Error, Result};
use crate::math;

/// `log⁺ x = max(log x, 0)`, with `log⁺ 0 = 0`.
pub fn log_plus(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain { what: "log_plus argument", value: x });
    }
    Ok(if x <= 1.0 { 0.0 } else { math::ln(x) })
}

/// `log⁻ x = max(-log x, 0)` for `x > 0`.
pub fn log_minus(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain { what: "log_minus argument", value: x });
    }
    Ok(if x >= 1.0 { 0.0 } else { -math::ln(x) })
}

/// Infallible `log⁺` for values already known to be norms.
#[inline]
pub(crate) fn log_plus_norm(x: f64) -> f64 {
    if x <= 1.0 {
        0.0
    } else {
        math::ln(x)
    }
}

/// Norm of `∧^k M`, i.e. the product of the `k` largest singular values.
pub fn exterior_norm(m: &Matrix, k: usize) -> Result<f64> {
    Ok(exterior_power(m, k)?.operator_norm())
}
