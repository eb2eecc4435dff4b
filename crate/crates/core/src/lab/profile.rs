//! Continuity profiles: extremes of `Λ_k` and of the change in `Λ_d` over
//! perturbations in shrinking `ρ_p` balls.

use alloc::vec::Vec;

use super::certificate::{semicontinuity_modulus_with, CertificateOptions};
use super::collapse::cheapest_collapse;
use super::sampler::{BallSampler, PreparedSampler};
use crate::base::{BaseSystem, FiniteCyclicBase};
use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::lyapunov::{lambda_d_logdet, lambda_k};
use crate::metrics::{rho_p, LpExponent};

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileRow {
    pub radius: f64,
    pub sup_lambda_k: f64,
    pub inf_lambda_k: f64,
    /// `sup |Λ_d(B) − Λ_d(A)|`.
    pub sup_abs_delta_lambda_d: f64,
    pub samples: usize,
    /// Whether the cheapest collapse of `A` fit in this ball.
    pub collapse_included: bool,
}

impl ProfileRow {
    /// Row seeded with `B = A`.
    pub fn new(radius: f64, lambda_k_a: f64) -> Self {
        Self {
            radius,
            sup_lambda_k: lambda_k_a,
            inf_lambda_k: lambda_k_a,
            sup_abs_delta_lambda_d: 0.0,
            samples: 1,
            collapse_included: false,
        }
    }

    pub fn absorb(&mut self, lambda_k_b: f64, delta_lambda_d: f64) {
        self.sup_lambda_k = self.sup_lambda_k.max(lambda_k_b);
        self.inf_lambda_k = self.inf_lambda_k.min(lambda_k_b);
        self.sup_abs_delta_lambda_d = self.sup_abs_delta_lambda_d.max(delta_lambda_d.abs());
        self.samples += 1;
    }

    /// Combines partial rows for the same radius.
    pub fn merge(&mut self, other: &Self) {
        self.sup_lambda_k = self.sup_lambda_k.max(other.sup_lambda_k);
        self.inf_lambda_k = self.inf_lambda_k.min(other.inf_lambda_k);
        self.sup_abs_delta_lambda_d = self.sup_abs_delta_lambda_d.max(other.sup_abs_delta_lambda_d);
        self.samples += other.samples - 1;
        self.collapse_included |= other.collapse_included;
    }

    pub fn width(&self) -> f64 {
        self.sup_lambda_k - self.inf_lambda_k
    }
}

/// Radii must be positive, at most 1, and strictly descending.
pub fn check_radii(radii: &[f64]) -> Result<()> {
    for (i, &r) in radii.iter().enumerate() {
        if !(r > 0.0 && r <= 1.0) || (i > 0 && !(r < radii[i - 1])) {
            return Err(Error::Domain { what: "profile radius (positive, <= 1, descending)", value: r });
        }
    }
    Ok(())
}

/// `(Λ_k(B), Λ_d(B) − Λ_d(A))` for one sampled `B` in the ball of `radius`.
pub fn profile_trial(
    sampler: &PreparedSampler<'_>,
    k: usize,
    p: LpExponent,
    radius: f64,
    lambda_d_a: f64,
    trial: u64,
) -> Result<(f64, f64)> {
    let s = sampler.sample(radius, p, trial)?;
    Ok((lambda_k(&s.b, k)?, lambda_d_logdet(&s.b)? - lambda_d_a))
}

/// The row seeded with `A` itself and, when it fits, its cheapest collapse.
pub fn profile_seed_row(a: &Cocycle<FiniteCyclicBase>, k: usize, p: LpExponent, radius: f64) -> Result<ProfileRow> {
    let mut row = ProfileRow::new(radius, lambda_k(a, k)?);
    if a.base().is_ergodic() {
        let w = cheapest_collapse(a)?;
        if w.atom.is_some() && rho_p(a, &w.b, p)?.rho < radius {
            row.absorb(lambda_k(&w.b, k)?, lambda_d_logdet(&w.b)? - lambda_d_logdet(a)?);
            row.collapse_included = true;
        }
    }
    Ok(row)
}

/// Sequential continuity profile; trial `t` at radius index `i` uses stream
/// `i·trials + t`.
pub fn continuity_profile(
    a: &Cocycle<FiniteCyclicBase>,
    k: usize,
    p: LpExponent,
    radii: &[f64],
    trials: u64,
    sampler: &BallSampler,
) -> Result<Vec<ProfileRow>> {
    check_radii(radii)?;
    let prepared = sampler.prepare(a)?;
    let lambda_d_a = lambda_d_logdet(a)?;
    let mut rows = Vec::with_capacity(radii.len());
    for (i, &r) in radii.iter().enumerate() {
        let mut row = profile_seed_row(a, k, p, r)?;
        for t in 0..trials {
            let (l, dd) = profile_trial(&prepared, k, p, r, lambda_d_a, i as u64 * trials + t)?;
            row.absorb(l, dd);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Smallest `ε` (to relative `1e-12`) whose certificate radius `δ` reaches
/// `radius`, found by doubling then bisection.
pub fn epsilon_for_radius(
    a: &Cocycle<FiniteCyclicBase>,
    k: usize,
    radius: f64,
    opts: CertificateOptions,
) -> Result<f64> {
    let delta = |eps: f64| -> Result<f64> {
        match semicontinuity_modulus_with(a, k, eps, LpExponent::ONE, opts) {
            Ok(c) => Ok(c.delta),
            Err(Error::ScanExhausted { .. } | Error::DegenerateRadius { .. }) => Ok(0.0),
            Err(e) => Err(e),
        }
    };
    let mut hi = 1.0;
    let mut doublings = 0;
    while delta(hi)? < radius {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::NoConvergence("no epsilon reaches the radius"));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if delta(mid)? >= radius {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    #[test]
    fn identity_profile_is_flat() {
        let a = Cocycle::identity(FiniteCyclicBase::cyclic(10).unwrap(), 2).unwrap();
        let rows = continuity_profile(&a, 1, LpExponent::ONE, &[0.1, 0.01], 30, &BallSampler::new(2)).unwrap();
        for r in rows {
            assert!(r.width() < 0.25 && r.sup_abs_delta_lambda_d < 0.25, "{r:?}");
        }
    }

    #[test]
    fn diagonal_epsilon_matches_closed_form() {
        let a = Cocycle::constant(FiniteCyclicBase::cyclic(30).unwrap(), Matrix::diagonal(&[2.0, 0.5])).unwrap();
        let e = epsilon_for_radius(&a, 1, 0.1, CertificateOptions::default()).unwrap();
        assert!((e - 0.1 / 0.9).abs() < 1e-10, "{e}");
    }

    #[test]
    fn radii_validation() {
        assert!(check_radii(&[0.5, 0.1]).is_ok());
        assert!(check_radii(&[0.1, 0.5]).is_err());
        assert!(check_radii(&[0.0]).is_err());
    }
}
