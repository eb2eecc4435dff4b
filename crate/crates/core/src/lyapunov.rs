//! Lyapunov exponents and the integrated sums `Λ_k = ∫ (λ_1 + … + λ_k) dμ`.
//!
//! On finite cyclic bases everything is exact: on a cycle of length `n`,
//! `λ̂_k = (1/n) log ρ(∧^k Aⁿ)` where `ρ` is the spectral radius of the
//! exterior monodromy. Exponents are the successive differences of the
//! `λ̂_k`. Elsewhere the reorthonormalized QR (Benettin) estimator and Monte
//! Carlo averages of `log ‖∧^k Aⁿ‖` are used.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::base::{BaseSystem, FiniteCyclicBase};
use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, householder_qr, log_plus_norm, spectral_radius, Matrix, ScaledMatrix};
use crate::math;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumMethod {
    ExactPeriodic,
    QrEstimate,
}

impl SpectrumMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ExactPeriodic => "exact_periodic",
            Self::QrEstimate => "qr_estimate",
        }
    }
}

/// Exponents `λ_1 ≥ … ≥ λ_d` (nats per step) with their partial sums.
#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovSpectrum {
    pub exponents: Vec<f64>,
    /// `lambda_hat[k-1] = λ_1 + … + λ_k`.
    pub lambda_hat: Vec<f64>,
    pub method: SpectrumMethod,
    pub error_bound: f64,
}

impl LyapunovSpectrum {
    pub(crate) fn from_exponents(mut exponents: Vec<f64>, method: SpectrumMethod, error_bound: f64) -> Self {
        exponents.sort_by(|a, b| b.total_cmp(a));
        let lambda_hat = exponents
            .iter()
            .scan(0.0, |acc, &l| {
                *acc += l;
                Some(*acc)
            })
            .collect();
        Self { exponents, lambda_hat, method, error_bound }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// `λ_1 − λ_d`.
    pub fn gap(&self) -> f64 {
        self.exponents[0] - self.exponents[self.dim() - 1]
    }
}

fn check_degree(k: usize, dim: usize) -> Result<()> {
    if k == 0 || k > dim {
        Err(Error::DegreeOutOfRange { k, dim })
    } else {
        Ok(())
    }
}

/// `λ̂_k` on one cycle from the spectral radius of `∧^k` of its monodromy.
fn cycle_lambda_hat(compounds: &[Matrix], cycle: &[usize]) -> Result<f64> {
    let mut p = ScaledMatrix::identity(compounds[0].dim());
    for &atom in cycle {
        p.left_mul(&compounds[atom]);
    }
    let (m, e) = p.eigen_ready();
    let r = spectral_radius(&m)?;
    if !(r > 0.0) {
        return Err(Error::NoConvergence("exterior monodromy has zero spectral radius"));
    }
    Ok((math::ln(r) + e as f64 * LN_2) / cycle.len() as f64)
}

/// Exponent data of one cycle of a finite base.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleSpectrum {
    pub cycle: usize,
    pub mass: f64,
    /// `λ̂_k` for `k = 1..=d`, from exterior monodromies.
    pub lambda_hat: Vec<f64>,
    pub spectrum: LyapunovSpectrum,
}

/// Exact spectra of every charged cycle.
pub fn cycle_spectra(a: &Cocycle<FiniteCyclicBase>) -> Result<Vec<CycleSpectrum>> {
    let d = a.dim();
    let compounds: Vec<Vec<Matrix>> = (1..=d).map(|k| a.compound_generators(k)).collect::<Result<_>>()?;
    let base = a.base();
    let mut out = Vec::new();
    for (c, atoms) in base.charged_cycles() {
        let lambda_hat: Vec<f64> = compounds.iter().map(|g| cycle_lambda_hat(g, atoms)).collect::<Result<_>>()?;
        let exponents = (0..d).map(|i| lambda_hat[i] - if i == 0 { 0.0 } else { lambda_hat[i - 1] }).collect();
        out.push(CycleSpectrum {
            cycle: c,
            mass: base.cycle_mass(c),
            lambda_hat,
            spectrum: LyapunovSpectrum::from_exponents(exponents, SpectrumMethod::ExactPeriodic, 0.0),
        });
    }
    Ok(out)
}

/// Exact spectrum over an ergodic finite base (a single charged cycle).
pub fn exact_spectrum_periodic(a: &Cocycle<FiniteCyclicBase>) -> Result<LyapunovSpectrum> {
    if !a.base().is_ergodic() {
        return Err(Error::NotErgodic);
    }
    Ok(cycle_spectra(a)?.remove(0).spectrum)
}

/// `∫ λ_i dμ` for each `i`, integrating cycle-wise exponents with cycle masses.
pub fn integrated_spectrum(a: &Cocycle<FiniteCyclicBase>) -> Result<LyapunovSpectrum> {
    let mut exps = vec![0.0; a.dim()];
    for c in cycle_spectra(a)? {
        for (e, l) in exps.iter_mut().zip(&c.spectrum.exponents) {
            *e += c.mass * l;
        }
    }
    Ok(LyapunovSpectrum::from_exponents(exps, SpectrumMethod::ExactPeriodic, 0.0))
}

/// `λ̂_k(x)` for every atom (zero-weight atoms included).
pub fn lambda_hat_per_atom(a: &Cocycle<FiniteCyclicBase>, k: usize) -> Result<Vec<f64>> {
    check_degree(k, a.dim())?;
    let compounds = a.compound_generators(k)?;
    let base = a.base();
    let mut out = vec![0.0; base.n_atoms()];
    for atoms in base.cycles() {
        let v = cycle_lambda_hat(&compounds, atoms)?;
        for &i in atoms {
            out[i] = v;
        }
    }
    Ok(out)
}

/// Exact `Λ_k(A)` on a finite base.
pub fn lambda_k(a: &Cocycle<FiniteCyclicBase>, k: usize) -> Result<f64> {
    check_degree(k, a.dim())?;
    let compounds = a.compound_generators(k)?;
    let base = a.base();
    let mut acc = 0.0;
    for (c, atoms) in base.charged_cycles() {
        acc += base.cycle_mass(c) * cycle_lambda_hat(&compounds, atoms)?;
    }
    Ok(acc)
}

/// `Λ̃_k(A) = −Λ_k(A⁻¹) = ∫ (λ_{d−k+1} + … + λ_d) dμ`.
pub fn lambda_tilde_k(a: &Cocycle<FiniteCyclicBase>, k: usize) -> Result<f64> {
    Ok(-lambda_k(&a.inverse_cocycle(), k)?)
}

/// `∫ log |det A| dμ`, which equals `Λ_d`.
pub fn lambda_d_logdet<B: BaseSystem>(a: &Cocycle<B>) -> Result<f64> {
    a.integrate_generators(|_, g| g.log_abs_determinant())
}

/// `λ_1 − λ_d < tol` on an ergodic finite base.
pub fn is_one_point_spectrum(a: &Cocycle<FiniteCyclicBase>, tol: f64) -> Result<bool> {
    Ok(exact_spectrum_periodic(a)?.gap() < tol)
}

/// Exponents from eigenvalue moduli of the plain monodromy through `atom`.
///
/// Only reliable while the monodromy is representable without rescaling;
/// [`cycle_spectra`] is the robust route.
pub fn monodromy_exponents(a: &Cocycle<FiniteCyclicBase>, atom: usize) -> Result<Vec<f64>> {
    let n = a.base().period(atom);
    let m = a.product(atom, n)?;
    let mut out: Vec<f64> = eigenvalues(&m)?.iter().map(|e| math::ln(e.modulus()) / n as f64).collect();
    out.sort_by(|x, y| y.total_cmp(x));
    Ok(out)
}

/// `a_n = (1/n) ∫ log ‖∧^k Aⁿ‖ dμ` for `n = 1..=n_max`, with its running infimum.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSequence {
    pub k: usize,
    pub values: Vec<f64>,
    pub inf_so_far: Vec<f64>,
    /// Monte Carlo standard errors; zero for exact sequences.
    pub std_errors: Vec<f64>,
}

impl LambdaSequence {
    fn new(k: usize, values: Vec<f64>, std_errors: Vec<f64>) -> Self {
        let inf_so_far = values
            .iter()
            .scan(f64::INFINITY, |m, &v| {
                *m = m.min(v);
                Some(*m)
            })
            .collect();
        Self { k, values, inf_so_far, std_errors }
    }

    pub fn inf(&self) -> f64 {
        self.inf_so_far.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// Integrals at one step of an [`ExteriorScan`], not divided by `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct ScanStep {
    pub n: usize,
    pub int_log: f64,
    pub int_log_plus: f64,
    pub int_log_minus: f64,
}

/// Per-atom running products `∧^k Aⁿ(x)`, advanced one step at a time.
pub(crate) struct ExteriorScan<'a> {
    base: &'a FiniteCyclicBase,
    compounds: Vec<Matrix>,
    weights: Vec<f64>,
    atoms: Vec<usize>,
    position: Vec<usize>,
    products: Vec<ScaledMatrix>,
    n: usize,
}

impl<'a> ExteriorScan<'a> {
    /// Integrates against `weights` (the base weights, or a restriction of
    /// them to an invariant set).
    pub fn new(a: &'a Cocycle<FiniteCyclicBase>, k: usize, weights: Vec<f64>) -> Result<Self> {
        check_degree(k, a.dim())?;
        let compounds = a.compound_generators(k)?;
        let atoms: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
        let dim = compounds[0].dim();
        Ok(Self {
            base: a.base(),
            compounds,
            position: atoms.clone(),
            products: vec![ScaledMatrix::identity(dim); atoms.len()],
            atoms,
            weights,
            n: 0,
        })
    }

    pub fn advance(&mut self) -> ScanStep {
        self.n += 1;
        let mut step = ScanStep { n: self.n, int_log: 0.0, int_log_plus: 0.0, int_log_minus: 0.0 };
        for (j, &x) in self.atoms.iter().enumerate() {
            let y = self.position[j];
            self.products[j].left_mul(&self.compounds[y]);
            self.position[j] = self.base.permutation()[y];
            let l = self.products[j].log_operator_norm();
            let w = self.weights[x];
            step.int_log += w * l;
            if l > 0.0 {
                step.int_log_plus += w * l;
            } else {
                step.int_log_minus -= w * l;
            }
        }
        step
    }
}

/// Exact sequence `a_n` on a finite base.
pub fn lambda_k_sequence(a: &Cocycle<FiniteCyclicBase>, k: usize, n_max: usize) -> Result<LambdaSequence> {
    if n_max == 0 {
        return Err(Error::Domain { what: "n_max", value: 0.0 });
    }
    let mut scan = ExteriorScan::new(a, k, a.base().weights().to_vec())?;
    let values = (1..=n_max).map(|n| scan.advance().int_log / n as f64).collect();
    Ok(LambdaSequence::new(k, values, vec![0.0; n_max]))
}

/// Monte Carlo sequence `a_n` from orbits started at `starts` (equally weighted).
pub fn lambda_k_sequence_mc<B: BaseSystem>(
    a: &Cocycle<B>,
    k: usize,
    n_max: usize,
    starts: &[B::Point],
) -> Result<LambdaSequence> {
    check_degree(k, a.dim())?;
    if n_max == 0 || starts.is_empty() {
        return Err(Error::Domain { what: "n_max or sample count", value: 0.0 });
    }
    let compounds = a.compound_generators(k)?;
    let mut sum = vec![0.0; n_max];
    let mut sum_sq = vec![0.0; n_max];
    for &x in starts {
        let mut p = ScaledMatrix::identity(compounds[0].dim());
        for (i, label) in a.base().orbit_labels(x, n_max)?.into_iter().enumerate() {
            p.left_mul(&compounds[label]);
            let v = p.log_operator_norm() / (i + 1) as f64;
            sum[i] += v;
            sum_sq[i] += v * v;
        }
    }
    let m = starts.len() as f64;
    let values: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let std_errors = sum_sq
        .iter()
        .zip(&values)
        .map(|(sq, mean)| if m > 1.0 { math::sqrt(((sq / m - mean * mean) * m / (m - 1.0)).max(0.0) / m) } else { 0.0 })
        .collect();
    Ok(LambdaSequence::new(k, values, std_errors))
}

/// Length of the discarded transient and of the averaging window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QrOptions {
    pub transient: usize,
    pub steps: usize,
}

const BATCHES: usize = 20;

/// QR estimate from `n` warm-up steps followed by `n` averaged steps.
pub fn qr_spectrum_estimate<B: BaseSystem>(a: &Cocycle<B>, x: B::Point, n: usize) -> Result<LyapunovSpectrum> {
    qr_spectrum_estimate_with(a, x, QrOptions { transient: n, steps: n })
}

/// Reorthonormalized QR estimate along the orbit of `x`.
///
/// Exponents whose running averages over the last quarter of the window
/// overlap are treated as tied and replaced by their mean (complex-conjugate
/// monodromy eigenvalues make the individual `log r_ii` oscillate forever,
/// while their sum converges). The error bound is the larger of the
/// last-quarter half-width of the running average and twice the batch-means
/// standard error.
pub fn qr_spectrum_estimate_with<B: BaseSystem>(a: &Cocycle<B>, x: B::Point, opts: QrOptions) -> Result<LyapunovSpectrum> {
    if opts.steps == 0 {
        return Err(Error::Domain { what: "QR step count", value: 0.0 });
    }
    let d = a.dim();
    let labels = a.base().orbit_labels(x, opts.transient + opts.steps)?;
    let tail_start = opts.steps - opts.steps / 4;
    let batch_len = (opts.steps / BATCHES).max(1);

    let mut q = Matrix::identity(d);
    let mut sums = vec![0.0; d];
    let mut tail: Vec<Vec<f64>> = Vec::with_capacity(opts.steps - tail_start);
    let mut batch_sums: Vec<Vec<f64>> = Vec::new();
    let mut batch = vec![0.0; d];
    for (t, &label) in labels.iter().enumerate() {
        let (q_next, r) = householder_qr(&a.generators()[label].matmul(&q));
        q = q_next;
        if t < opts.transient {
            continue;
        }
        let s = t - opts.transient;
        for i in 0..d {
            let v = r[i].abs();
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NoConvergence("QR diagonal left the floating-point range"));
            }
            let l = math::ln(v);
            sums[i] += l;
            batch[i] += l;
        }
        if (s + 1) % batch_len == 0 {
            batch_sums.push(core::mem::replace(&mut batch, vec![0.0; d]));
        }
        if s >= tail_start {
            tail.push(sums.iter().map(|v| v / (s + 1) as f64).collect());
        }
    }
    let steps = opts.steps as f64;
    let mean: Vec<f64> = sums.iter().map(|s| s / steps).collect();

    // group adjacent exponents with overlapping tail ranges
    let range = |idx: &[usize]| {
        let series = tail.iter().map(|row| idx.iter().map(|&i| row[i]).sum::<f64>() / idx.len() as f64);
        series.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..d {
        let (lo_i, hi_i) = range(&[i]);
        if let Some(last) = groups.last_mut() {
            let j = *last.last().unwrap();
            let (lo_j, hi_j) = range(&[j]);
            if lo_i <= hi_j && lo_j <= hi_i {
                last.push(i);
                continue;
            }
        }
        groups.push(vec![i]);
    }

    let mut exponents = vec![0.0; d];
    let mut error_bound: f64 = 0.0;
    for g in &groups {
        let m = g.iter().map(|&i| mean[i]).sum::<f64>() / g.len() as f64;
        for &i in g {
            exponents[i] = m;
        }
        let (lo, hi) = range(g);
        let half_width = if tail.is_empty() { 0.0 } else { (hi - lo) / 2.0 };
        let se = if batch_sums.len() >= 2 {
            let means: Vec<f64> = batch_sums
                .iter()
                .map(|b| g.iter().map(|&i| b[i]).sum::<f64>() / (g.len() * batch_len) as f64)
                .collect();
            let bm = means.iter().sum::<f64>() / means.len() as f64;
            let var = means.iter().map(|v| (v - bm) * (v - bm)).sum::<f64>() / (means.len() - 1) as f64;
            math::sqrt(var / means.len() as f64)
        } else {
            0.0
        };
        error_bound = error_bound.max(half_width).max(2.0 * se);
    }
    Ok(LyapunovSpectrum::from_exponents(exponents, SpectrumMethod::QrEstimate, error_bound))
}

/// Average of QR estimates from several starts; the bound combines the
/// mean per-run bound with twice the across-run standard error.
pub fn qr_spectrum_over_starts<B: BaseSystem>(
    a: &Cocycle<B>,
    starts: &[B::Point],
    opts: QrOptions,
) -> Result<LyapunovSpectrum> {
    if starts.is_empty() {
        return Err(Error::Domain { what: "start count", value: 0.0 });
    }
    let runs: Vec<LyapunovSpectrum> = starts.iter().map(|&x| qr_spectrum_estimate_with(a, x, opts)).collect::<Result<_>>()?;
    let m = runs.len() as f64;
    let d = a.dim();
    let mean: Vec<f64> = (0..d).map(|i| runs.iter().map(|r| r.exponents[i]).sum::<f64>() / m).collect();
    let mut se: f64 = 0.0;
    if runs.len() > 1 {
        for i in 0..d {
            let var = runs.iter().map(|r| (r.exponents[i] - mean[i]) * (r.exponents[i] - mean[i])).sum::<f64>() / (m - 1.0);
            se = se.max(math::sqrt(var / m));
        }
    }
    let run_bound = runs.iter().map(|r| r.error_bound).sum::<f64>() / m;
    Ok(LyapunovSpectrum::from_exponents(mean, SpectrumMethod::QrEstimate, run_bound.max(2.0 * se)))
}

/// `∫ log⁺ ‖∧^k A‖ dμ`.
pub fn int_log_plus_exterior<B: BaseSystem>(a: &Cocycle<B>, k: usize) -> Result<f64> {
    check_degree(k, a.dim())?;
    let compounds = a.compound_generators(k)?;
    a.integrate_generators(|l, _| log_plus_norm(crate::linalg::operator_norm(&compounds[l])))
}
