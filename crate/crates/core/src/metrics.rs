//! `L^p` norms of matrix-valued maps and the cocycle distances
//! `τ_p(A,B) = ‖A−B‖_p + ‖A⁻¹−B⁻¹‖_p` and `ρ_p = τ_p/(1+τ_p)`.
//!
//! Cocycle values depend on the point only through its label, so every
//! quantity here is an exact weighted sum against the label law, for finite
//! and sampled bases alike. Labels of zero weight are ignored (mod 0).

use core::fmt;

use crate::base::BaseSystem;
use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::linalg::{operator_norm, Matrix};
use crate::math;

/// Exponent `p ∈ [1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub const ONE: Self = Self::Finite(1.0);

    /// `p` must be at least 1; `f64::INFINITY` maps to [`LpExponent::Infinity`].
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Self::Infinity)
        } else if p >= 1.0 && p.is_finite() {
            Ok(Self::Finite(p))
        } else {
            Err(Error::Domain { what: "L^p exponent (p >= 1 required)", value: p })
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Self::Finite(p) => *p,
            Self::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for LpExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinity => f.write_str("inf"),
        }
    }
}

/// A `τ_p` distance with its bounded companion `ρ_p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricValue {
    pub tau: f64,
    pub rho: f64,
    pub p: LpExponent,
}

/// `t/(1+t)`, with `ρ = 1` exactly for `t = ∞`.
pub fn rho_from_tau(tau: f64) -> f64 {
    if tau == f64::INFINITY {
        1.0
    } else {
        tau / (1.0 + tau)
    }
}

/// Inverse of [`rho_from_tau`] on `[0, 1)`.
pub fn tau_from_rho(rho: f64) -> f64 {
    if rho >= 1.0 {
        f64::INFINITY
    } else {
        rho / (1.0 - rho)
    }
}

/// Weighted `p`-mean `(Σ w v^p / Σ w)^{1/p}` of non-negative values; the
/// `p = ∞` case is the max over positive weights.
pub fn weighted_lp(weights: &[f64], values: &[f64], p: LpExponent) -> f64 {
    let pairs = || weights.iter().zip(values).filter(|(w, _)| **w > 0.0);
    let max = pairs().map(|(_, v)| *v).fold(0.0, f64::max);
    match p {
        LpExponent::Infinity => max,
        _ if max == 0.0 || max == f64::INFINITY => max,
        LpExponent::Finite(p) if p == 1.0 => {
            let (num, den) = pairs().fold((0.0, 0.0), |(n, d), (w, v)| (n + w * v, d + w));
            num / den
        }
        LpExponent::Finite(p) => {
            // scaled by the max so v^p cannot overflow
            let (num, den) = pairs().fold((0.0, 0.0), |(n, d), (w, v)| (n + w * math::powf(v / max, p), d + w));
            max * math::powf(num / den, 1.0 / p)
        }
    }
}

/// `‖A‖_p` with the spectral norm pointwise.
pub fn lp_norm<B: BaseSystem>(a: &Cocycle<B>, p: LpExponent) -> f64 {
    let norms: alloc::vec::Vec<f64> = a.generators().iter().map(operator_norm).collect();
    weighted_lp(a.base().label_weights(), &norms, p)
}

fn diff_norm(x: &Matrix, y: &Matrix) -> f64 {
    if x == y {
        0.0
    } else {
        operator_norm(&x.sub(y))
    }
}

/// `τ_p(A, B)`.
pub fn tau_p<B: BaseSystem>(a: &Cocycle<B>, b: &Cocycle<B>, p: LpExponent) -> Result<f64> {
    a.check_compatible(b)?;
    let w = a.base().label_weights();
    let direct: alloc::vec::Vec<f64> = a.generators().iter().zip(b.generators()).map(|(x, y)| diff_norm(x, y)).collect();
    let inverse: alloc::vec::Vec<f64> = a
        .inverse_generators()
        .iter()
        .zip(b.inverse_generators())
        .map(|(x, y)| diff_norm(x, y))
        .collect();
    Ok(weighted_lp(w, &direct, p) + weighted_lp(w, &inverse, p))
}

/// `ρ_p(A, B)` together with the underlying `τ_p`.
pub fn rho_p<B: BaseSystem>(a: &Cocycle<B>, b: &Cocycle<B>, p: LpExponent) -> Result<MetricValue> {
    let tau = tau_p(a, b, p)?;
    Ok(MetricValue { tau, rho: rho_from_tau(tau), p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::FiniteCyclicBase;
    use alloc::string::ToString;
    use alloc::vec;

    fn base(n: usize) -> FiniteCyclicBase {
        FiniteCyclicBase::cyclic(n).unwrap()
    }

    #[test]
    fn exponent_domain() {
        assert!(LpExponent::new(0.5).is_err());
        assert!(LpExponent::new(f64::NAN).is_err());
        assert_eq!(LpExponent::new(f64::INFINITY).unwrap(), LpExponent::Infinity);
        assert_eq!(LpExponent::Infinity.to_string(), "inf");
    }

    #[test]
    fn norms_of_simple_maps() {
        let c = Cocycle::constant(base(5), Matrix::diagonal(&[2.0, 0.5])).unwrap();
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(lp_norm(&c, LpExponent::new(p).unwrap()), 2.0);
        }
        let two = Cocycle::new(base(2), vec![Matrix::identity(2), Matrix::diagonal(&[3.0, 1.0])]).unwrap();
        assert_eq!(lp_norm(&two, LpExponent::ONE), 2.0);
        assert_eq!(lp_norm(&two, LpExponent::Infinity), 3.0);
        assert!((lp_norm(&two, LpExponent::Finite(2.0)) - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn diagonal_distance() {
        let a = Cocycle::constant(base(3), Matrix::diagonal(&[2.0, 0.5])).unwrap();
        let b = Cocycle::constant(base(3), Matrix::diagonal(&[3.0, 1.0 / 3.0])).unwrap();
        // A - B = diag(-1, 1/6), A⁻¹ - B⁻¹ = diag(1/6, -1)
        let t = tau_p(&a, &b, LpExponent::ONE).unwrap();
        assert!((t - 2.0).abs() < 1e-15);
        let m = rho_p(&a, &a, LpExponent::Infinity).unwrap();
        assert_eq!((m.tau, m.rho), (0.0, 0.0));
        assert_eq!(rho_from_tau(1.0), 0.5);
        assert_eq!(rho_from_tau(f64::INFINITY), 1.0);
    }

    #[test]
    fn single_atom_rotation_matches_hand_sum() {
        let n = 8;
        let a = Cocycle::constant(base(n), Matrix::diagonal(&[2.0, 0.5])).unwrap();
        let r = Matrix::rotation(0.1);
        let b = a.perturb_on_set(&[(3, r.clone())]).unwrap();
        let a3 = &a.generators()[3];
        let direct = operator_norm(&r.sub(&Matrix::identity(2)).matmul(a3));
        let inverse = operator_norm(&a3.inverse().unwrap().matmul(&r.inverse().unwrap().sub(&Matrix::identity(2))));
        let want = (direct + inverse) / n as f64;
        let got = tau_p(&a, &b, LpExponent::ONE).unwrap();
        assert!((got - want).abs() < 1e-15);
        // the ess-sup sees the full single-atom cost
        let sup = tau_p(&a, &b, LpExponent::Infinity).unwrap();
        assert!((sup - (direct + inverse)).abs() < 1e-14);
    }

    #[test]
    fn base_mismatch() {
        let a = Cocycle::identity(base(3), 2).unwrap();
        let b = Cocycle::identity(base(4), 2).unwrap();
        assert_eq!(tau_p(&a, &b, LpExponent::ONE), Err(Error::BaseMismatch));
        let c = Cocycle::identity(base(3), 3).unwrap();
        assert!(matches!(tau_p(&a, &c, LpExponent::ONE), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn zero_weight_atoms_are_invisible() {
        let b = FiniteCyclicBase::new(vec![0.5, 0.5, 0.0], vec![1, 0, 2]).unwrap();
        let a = Cocycle::identity(b.clone(), 2).unwrap();
        let c = a.with_generators(&[(2, Matrix::diagonal(&[100.0, 1.0]))]).unwrap();
        assert_eq!(tau_p(&a, &c, LpExponent::Infinity).unwrap(), 0.0);
    }
}
