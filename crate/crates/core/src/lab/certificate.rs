//! Explicit radius for upper semicontinuity of `Λ_k` at a cocycle.
//!
//! Positive case (`λ̂_k ≥ 0` a.e.): scan for `N` with
//! `(1/N)∫ log⁻‖∧^k A^N‖ < ε` and `(1/N)∫ log‖∧^k A^N‖ < Λ_k(A) + ε`, set
//! `η = ε/N`, take `K` from the uniform-integrability cutoff of
//! `f = log⁺‖A‖`, then `δ' = min(η, ε e^{−K(N−1)})` and `δ = δ'/(1+δ')`.
//! Every `B` with `ρ_1(A,B) < δ` has `Λ_k(B) ≤ Λ_k(A) + (2+7k)ε`.
//!
//! Otherwise a shift `a ∈ {1, 2, 4, …}` isolates the invariant set
//! `L_a = {λ̂_k < −a}`, and the positive recipe runs for `e^a A` on the
//! complement with `ε/(2+7k)`. Then `Λ_k(B) < Λ_k(A) + (3+k)ε`.

use alloc::vec::Vec;

use super::integrability::uniform_integrability_weighted;
use crate::base::FiniteCyclicBase;
use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::linalg::{log_plus_norm, operator_norm};
use crate::lyapunov::{lambda_hat_per_atom, lambda_k, ExteriorScan};
use crate::math;
use crate::metrics::LpExponent;

/// Largest power-of-two shift tried before giving up.
const MAX_SHIFT_DOUBLINGS: u32 = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateCase {
    /// `λ̂_k ≥ 0` almost everywhere; constant `2 + 7k`.
    Positive,
    /// Reduced to the positive case on `{λ̂_k ≥ −a}`; constant `3 + k`.
    Shifted,
}

impl CertificateCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Positive => "positive",
            Self::Shifted => "shifted",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemicontinuityCertificate {
    pub k: usize,
    pub epsilon: f64,
    /// Balls are `ρ_1` balls; since `ρ_1 ≤ ρ_p` they also serve for this `p`.
    pub p: LpExponent,
    pub case: CertificateCase,
    /// `Λ_k(B) < Λ_k(A) + c·ε` inside the ball.
    pub c: f64,
    /// `ε` used by the positive recipe (`ε/(2+7k)` in the shifted case).
    pub inner_epsilon: f64,
    pub n: usize,
    /// `(1/N)∫ log‖∧^k A^N‖` and `(1/N)∫ log⁻‖∧^k A^N‖` at the chosen `N`.
    pub a_n: f64,
    pub log_minus_mean: f64,
    pub gamma: f64,
    pub big_k: f64,
    pub eta: f64,
    /// `min(η, ε e^{−K(N−1)})` of the positive recipe.
    pub recipe_delta_prime: f64,
    /// Radius in `τ_1`; equals `recipe_delta_prime` in the positive case.
    pub delta_prime: f64,
    /// Radius in `ρ_1`.
    pub delta: f64,
    pub shift: f64,
    pub lambda_k: f64,
    /// Set when the radius comes from the shifted reduction, whose ball the
    /// argument only asserts to exist.
    pub conservative: bool,
}

impl SemicontinuityCertificate {
    /// `Λ_k(A) + c·ε`.
    pub fn upper_bound(&self) -> f64 {
        self.lambda_k + self.c * self.epsilon
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificateOptions {
    /// Cap on the scan for `N`.
    pub n_max: usize,
    /// `λ̂_k ≥ −positivity_tol` counts as non-negative.
    pub positivity_tol: f64,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self { n_max: 10_000, positivity_tol: 1e-12 }
    }
}

/// Output of the positive-case recipe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Recipe {
    pub n: usize,
    pub a_n: f64,
    pub log_minus_mean: f64,
    pub gamma: f64,
    pub big_k: f64,
    pub eta: f64,
    pub delta_prime: f64,
}

/// Positive-case recipe for `a` against `weights` (an invariant
/// sub-measure), where `lambda` is `∫ λ̂_k` against the same weights.
pub(crate) fn positive_recipe(
    a: &Cocycle<FiniteCyclicBase>,
    k: usize,
    weights: Vec<f64>,
    lambda: f64,
    epsilon: f64,
    n_max: usize,
) -> Result<Recipe> {
    let f: Vec<f64> = a.generators().iter().map(|g| log_plus_norm(operator_norm(g))).collect();
    let mut scan = ExteriorScan::new(a, k, weights.clone())?;
    let mut best = (0, f64::INFINITY);
    let mut found = None;
    for _ in 0..n_max {
        let step = scan.advance();
        let n = step.n as f64;
        let a_n = step.int_log / n;
        let log_minus = step.int_log_minus / n;
        if log_minus < epsilon && a_n < lambda + epsilon {
            found = Some((step.n, a_n, log_minus));
            break;
        }
        let excess = (log_minus - epsilon).max(a_n - lambda - epsilon);
        if excess < best.1 {
            best = (step.n, excess);
        }
    }
    let (n, a_n, log_minus_mean) =
        found.ok_or(Error::ScanExhausted { best_n: best.0, n_max, best_excess: best.1 })?;
    let eta = epsilon / n as f64;
    let u = uniform_integrability_weighted(&weights, &f, eta)?;
    let log_tail = math::ln(epsilon) - u.k * (n - 1) as f64;
    let delta_prime = eta.min(math::exp(log_tail));
    if !(delta_prime > f64::MIN_POSITIVE) {
        return Err(Error::DegenerateRadius { log_delta_prime: math::ln(eta).min(log_tail) });
    }
    Ok(Recipe { n, a_n, log_minus_mean, gamma: u.gamma, big_k: u.k, eta, delta_prime })
}

/// Certificate with default options.
pub fn semicontinuity_modulus(
    a: &Cocycle<FiniteCyclicBase>,
    k: usize,
    epsilon: f64,
    p: LpExponent,
) -> Result<SemicontinuityCertificate> {
    semicontinuity_modulus_with(a, k, epsilon, p, CertificateOptions::default())
}

pub fn semicontinuity_modulus_with(
    a: &Cocycle<FiniteCyclicBase>,
    k: usize,
    epsilon: f64,
    p: LpExponent,
    opts: CertificateOptions,
) -> Result<SemicontinuityCertificate> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain { what: "epsilon", value: epsilon });
    }
    let base = a.base();
    let weights = base.weights();
    let hat = lambda_hat_per_atom(a, k)?;
    let lam = lambda_k(a, k)?;
    let positive = hat.iter().zip(weights).all(|(h, w)| *w == 0.0 || *h >= -opts.positivity_tol);
    let kf = k as f64;

    if positive {
        let r = positive_recipe(a, k, weights.to_vec(), lam, epsilon, opts.n_max)?;
        return Ok(SemicontinuityCertificate {
            k,
            epsilon,
            p,
            case: CertificateCase::Positive,
            c: 2.0 + 7.0 * kf,
            inner_epsilon: epsilon,
            n: r.n,
            a_n: r.a_n,
            log_minus_mean: r.log_minus_mean,
            gamma: r.gamma,
            big_k: r.big_k,
            eta: r.eta,
            recipe_delta_prime: r.delta_prime,
            delta_prime: r.delta_prime,
            delta: r.delta_prime / (1.0 + r.delta_prime),
            shift: 0.0,
            lambda_k: lam,
            conservative: false,
        });
    }

    let compounds = a.compound_generators(k)?;
    let log_plus_ext: Vec<f64> = compounds.iter().map(|g| log_plus_norm(operator_norm(g))).collect();
    let mut shift = None;
    for j in 0..MAX_SHIFT_DOUBLINGS {
        let s = (1u64 << j) as f64;
        let (mut top, mut hat_int) = (0.0, 0.0);
        for i in 0..weights.len() {
            if weights[i] > 0.0 && hat[i] < -s {
                top += weights[i] * log_plus_ext[i];
                hat_int += weights[i] * hat[i];
            }
        }
        if top < epsilon && hat_int > -epsilon {
            shift = Some(s);
            break;
        }
    }
    let s = shift.ok_or(Error::NoConvergence("no admissible positivity shift"))?;
    let restricted: Vec<f64> = weights.iter().zip(&hat).map(|(w, h)| if *h < -s { 0.0 } else { *w }).collect();
    let lam_shifted: f64 = restricted.iter().zip(&hat).map(|(w, h)| w * (h + kf * s)).sum();
    let inner_epsilon = epsilon / (2.0 + 7.0 * kf);
    let scaled = a.scale(math::exp(s))?;
    let r = positive_recipe(&scaled, k, restricted, lam_shifted, inner_epsilon, opts.n_max)?;
    let delta_prime = (math::exp(-s) * r.delta_prime).min(epsilon);
    if !(delta_prime > f64::MIN_POSITIVE) {
        return Err(Error::DegenerateRadius { log_delta_prime: math::ln(r.delta_prime) - s });
    }
    Ok(SemicontinuityCertificate {
        k,
        epsilon,
        p,
        case: CertificateCase::Shifted,
        c: 3.0 + kf,
        inner_epsilon,
        n: r.n,
        a_n: r.a_n,
        log_minus_mean: r.log_minus_mean,
        gamma: r.gamma,
        big_k: r.big_k,
        eta: r.eta,
        recipe_delta_prime: r.delta_prime,
        delta_prime,
        delta: delta_prime / (1.0 + delta_prime),
        shift: s,
        lambda_k: lam,
        conservative: true,
    })
}
