//! Sampling checks of a semicontinuity certificate.

use alloc::vec::Vec;

use super::certificate::SemicontinuityCertificate;
use super::sampler::{BallSampler, PerturbationFamily, PreparedSampler};
use crate::base::FiniteCyclicBase;
use crate::cocycle::Cocycle;
use crate::error::Result;
use crate::lyapunov::{integrated_spectrum, lambda_k, LyapunovSpectrum};
use crate::metrics::{rho_p, LpExponent};

/// One `(A, B)` experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationReport {
    pub trial: u64,
    pub family: PerturbationFamily,
    pub radius: f64,
    pub rho: f64,
    pub tau: f64,
    pub p: LpExponent,
    pub lambda_k_a: f64,
    pub lambda_k_b: f64,
    /// `Λ_k(B) − Λ_k(A)`.
    pub gap: f64,
    pub exponents_a: Vec<f64>,
    pub exponents_b: Vec<f64>,
}

/// Exact comparison of `A` and `B` at degree `k`.
pub fn perturbation_report(
    a: &Cocycle<FiniteCyclicBase>,
    b: &Cocycle<FiniteCyclicBase>,
    k: usize,
    p: LpExponent,
    spectrum_a: &LyapunovSpectrum,
    lambda_k_a: f64,
) -> Result<PerturbationReport> {
    let metric = rho_p(a, b, p)?;
    let lambda_k_b = lambda_k(b, k)?;
    Ok(PerturbationReport {
        trial: 0,
        family: if metric.tau == 0.0 { PerturbationFamily::Identity } else { PerturbationFamily::Rotation },
        radius: metric.rho,
        rho: metric.rho,
        tau: metric.tau,
        p,
        lambda_k_a,
        lambda_k_b,
        gap: lambda_k_b - lambda_k_a,
        exponents_a: spectrum_a.exponents.clone(),
        exponents_b: integrated_spectrum(b)?.exponents,
    })
}

/// Summary of a verification run.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationSummary {
    pub reports: Vec<PerturbationReport>,
    pub max_gap: f64,
    /// Reports with `gap ≥ C·ε`.
    pub violations: usize,
    /// `C·ε`.
    pub allowed_gap: f64,
}

impl VerificationSummary {
    /// Order-independent summary of `reports`.
    pub fn from_reports(cert: &SemicontinuityCertificate, mut reports: Vec<PerturbationReport>) -> Self {
        reports.sort_by_key(|r| r.trial);
        let allowed_gap = cert.c * cert.epsilon;
        let max_gap = reports.iter().map(|r| r.gap).fold(f64::NEG_INFINITY, f64::max);
        let violations = reports.iter().filter(|r| !(r.gap < allowed_gap)).count();
        Self { reports, max_gap, violations, allowed_gap }
    }
}

/// One trial: a `B` in the certified `ρ_1` ball and its report.
pub fn verify_trial(
    sampler: &PreparedSampler<'_>,
    a: &Cocycle<FiniteCyclicBase>,
    cert: &SemicontinuityCertificate,
    spectrum_a: &LyapunovSpectrum,
    trial: u64,
) -> Result<PerturbationReport> {
    let sample = sampler.sample(cert.delta, LpExponent::ONE, trial)?;
    let mut report = perturbation_report(a, &sample.b, cert.k, LpExponent::ONE, spectrum_a, cert.lambda_k)?;
    report.trial = trial;
    report.family = sample.family;
    report.radius = cert.delta;
    Ok(report)
}

/// Samples `trials` perturbations inside the certified ball and compares
/// `Λ_k` exactly.
pub fn verify_semicontinuity(
    a: &Cocycle<FiniteCyclicBase>,
    cert: &SemicontinuityCertificate,
    sampler: &BallSampler,
    trials: u64,
) -> Result<VerificationSummary> {
    let prepared = sampler.prepare(a)?;
    let spectrum_a = integrated_spectrum(a)?;
    let reports = (0..trials)
        .map(|t| verify_trial(&prepared, a, cert, &spectrum_a, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationSummary::from_reports(cert, reports))
}
