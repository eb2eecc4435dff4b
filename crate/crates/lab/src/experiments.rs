//! The eight experiments. Each turns a validated config into in-memory
//! artifacts; trials run on the rayon pool and are collected in trial order,
//! so outputs do not depend on scheduling.

use std::collections::BTreeMap;

use cocycle_core::base::SampledPoint;
use cocycle_core::lab::{
    collapse_witness, constant_collapse, profile_seed_row, epsilon_for_radius, proof_internals_check,
    semicontinuity_modulus_with, verify_trial, BallSampler, CertificateOptions, CollapseWitness, PerturbationFamily,
    SemicontinuityCertificate, VerificationSummary,
};
use cocycle_core::linalg::eigenvalues;
use cocycle_core::lyapunov::{
    cycle_spectra, integrated_spectrum, lambda_d_logdet, lambda_k, lambda_k_sequence, lambda_k_sequence_mc,
    qr_spectrum_over_starts, QrOptions,
};
use cocycle_core::metrics::rho_p;
use cocycle_core::{Cocycle, Error, FiniteCyclicBase, LpExponent, LyapunovSpectrum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::artifacts::{cell, num, nums, Artifacts, Table};
use crate::config::{BuiltCocycle, BuiltSystem, ExperimentConfig, ExperimentKind};
use crate::error::{Context, LabError};

/// Runs `kind` on a config that already passed validation.
pub fn run_experiment(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<Artifacts, LabError> {
    let system = cfg.build().context("building the cocycle")?;
    match kind {
        ExperimentKind::Spectrum => spectrum(cfg, &system),
        ExperimentKind::LambdaSeq => lambda_seq(cfg, &system),
        ExperimentKind::Rho => rho(cfg, &system),
        ExperimentKind::Certificate => certificate(cfg, finite(&system.cocycle)?),
        ExperimentKind::Sweep => sweep(cfg, finite(&system.cocycle)?),
        ExperimentKind::Collapse => collapse(cfg, finite(&system.cocycle)?),
        ExperimentKind::Profile => profile(cfg, finite(&system.cocycle)?),
        ExperimentKind::ProofCheck => {
            let other = match &system.other {
                Some(o) => Some(finite(o)?),
                None => None,
            };
            proof_check(cfg, finite(&system.cocycle)?, other)
        }
    }
}

fn finite(c: &BuiltCocycle) -> Result<&Cocycle<FiniteCyclicBase>, LabError> {
    match c {
        BuiltCocycle::Finite(a) => Ok(a),
        BuiltCocycle::Sampled(_) => Err(Error::Unsupported("experiment needs a finite base")).context("base"),
    }
}

fn seed(cfg: &ExperimentConfig) -> u64 {
    cfg.seed.unwrap_or(0)
}

fn spectrum_json(s: &LyapunovSpectrum) -> Value {
    json!({
        "exponents": nums(&s.exponents),
        "partial_sums": nums(&s.lambda_hat),
        "method": s.method.as_str(),
        "error_bound": num(s.error_bound),
    })
}

fn spectrum_rows(t: &mut Table, scope: &str, mass: f64, s: &LyapunovSpectrum) -> Result<(), LabError> {
    for (i, (e, l)) in s.exponents.iter().zip(&s.lambda_hat).enumerate() {
        t.row([scope.to_string(), cell(mass), (i + 1).to_string(), cell(*e), cell(*l)])?;
    }
    Ok(())
}

fn sampled_starts(n: usize) -> Vec<SampledPoint> {
    (0..n as u64).map(|i| SampledPoint::new(i, 0)).collect()
}

fn spectrum(cfg: &ExperimentConfig, system: &BuiltSystem) -> Result<Artifacts, LabError> {
    let mut t = Table::new(&["scope", "mass", "index", "exponent", "partial_sum"])?;
    let result = match &system.cocycle {
        BuiltCocycle::Finite(a) => {
            let s = integrated_spectrum(a).context("exact spectrum")?;
            let cycles = cycle_spectra(a).context("cycle spectra")?;
            spectrum_rows(&mut t, "integrated", 1.0, &s)?;
            for c in &cycles {
                spectrum_rows(&mut t, &format!("cycle {}", c.cycle), c.mass, &c.spectrum)?;
            }
            let mut v = spectrum_json(&s);
            v["lambda_d_logdet"] = num(lambda_d_logdet(a).context("log det")?);
            v["charged_cycles"] = json!(cycles.len());
            v
        }
        BuiltCocycle::Sampled(a) => {
            let opts = QrOptions { transient: cfg.steps(), steps: cfg.steps() };
            let s = qr_spectrum_over_starts(a, &sampled_starts(cfg.samples()), opts).context("QR estimate")?;
            spectrum_rows(&mut t, "qr", 1.0, &s)?;
            let mut v = spectrum_json(&s);
            v["lambda_d_logdet"] = num(lambda_d_logdet(a).context("log det")?);
            v["starts"] = json!(cfg.samples());
            v["steps"] = json!(cfg.steps());
            v
        }
    };
    Ok(Artifacts { result, csv: t.finish()? })
}

fn lambda_seq(cfg: &ExperimentConfig, system: &BuiltSystem) -> Result<Artifacts, LabError> {
    let k = cfg.k_or(1);
    let (seq, exact) = match &system.cocycle {
        BuiltCocycle::Finite(a) => {
            (lambda_k_sequence(a, k, cfg.n_max()).context("sequence")?, Some(lambda_k(a, k).context("lambda_k")?))
        }
        BuiltCocycle::Sampled(a) => {
            (lambda_k_sequence_mc(a, k, cfg.n_max(), &sampled_starts(cfg.samples())).context("sequence")?, None)
        }
    };
    let mut t = Table::new(&["n", "a_n", "inf_so_far", "std_error"])?;
    for (i, ((v, m), se)) in seq.values.iter().zip(&seq.inf_so_far).zip(&seq.std_errors).enumerate() {
        t.row([(i + 1).to_string(), cell(*v), cell(*m), cell(*se)])?;
    }
    let last = seq.values.len() - 1;
    let result = json!({
        "k": k,
        "n_max": seq.values.len(),
        "lambda_k": exact.map(num).unwrap_or(Value::Null),
        "inf": num(seq.inf()),
        "last": num(seq.values[last]),
        "last_std_error": num(seq.std_errors[last]),
    });
    Ok(Artifacts { result, csv: t.finish()? })
}

/// `p` values reported next to the configured one.
const P_LADDER: [f64; 3] = [1.0, 2.0, 4.0];

fn rho(cfg: &ExperimentConfig, system: &BuiltSystem) -> Result<Artifacts, LabError> {
    let p = cfg.p_exponent();
    let mut ps: Vec<LpExponent> = P_LADDER.iter().map(|&x| LpExponent::new(x).expect("p >= 1")).collect();
    ps.push(LpExponent::Infinity);
    if !ps.contains(&p) {
        ps.push(p);
    }
    let metric = |q: LpExponent| match (&system.cocycle, &system.other) {
        (BuiltCocycle::Finite(a), Some(BuiltCocycle::Finite(b))) => rho_p(a, b, q),
        (BuiltCocycle::Sampled(a), Some(BuiltCocycle::Sampled(b))) => rho_p(a, b, q),
        _ => Err(Error::BaseMismatch),
    };
    let mut t = Table::new(&["p", "tau", "rho"])?;
    for &q in &ps {
        let m = metric(q).context("distance")?;
        t.row([q.to_string(), cell(m.tau), cell(m.rho)])?;
    }
    let m = metric(p).context("distance")?;
    let result = json!({ "p": p.to_string(), "tau": num(m.tau), "rho": num(m.rho) });
    Ok(Artifacts { result, csv: t.finish()? })
}

fn certificate_options(cfg: &ExperimentConfig) -> CertificateOptions {
    CertificateOptions { n_max: cfg.n_max(), ..CertificateOptions::default() }
}

pub fn certificate_json(c: &SemicontinuityCertificate) -> Value {
    json!({
        "k": c.k,
        "epsilon": num(c.epsilon),
        "p": c.p.to_string(),
        "case": c.case.as_str(),
        "c": num(c.c),
        "inner_epsilon": num(c.inner_epsilon),
        "n": c.n,
        "a_n": num(c.a_n),
        "log_minus_mean": num(c.log_minus_mean),
        "gamma": num(c.gamma),
        "big_k": num(c.big_k),
        "eta": num(c.eta),
        "recipe_delta_prime": num(c.recipe_delta_prime),
        "delta_prime": num(c.delta_prime),
        "delta": num(c.delta),
        "shift": num(c.shift),
        "lambda_k": num(c.lambda_k),
        "upper_bound": num(c.upper_bound()),
        "conservative": c.conservative,
    })
}

fn make_certificate(cfg: &ExperimentConfig, a: &Cocycle<FiniteCyclicBase>) -> Result<SemicontinuityCertificate, LabError> {
    let eps = cfg.epsilon.expect("validated: epsilon present");
    semicontinuity_modulus_with(a, cfg.k_or(1), eps, cfg.p_exponent(), certificate_options(cfg)).context("certificate")
}

fn certificate(cfg: &ExperimentConfig, a: &Cocycle<FiniteCyclicBase>) -> Result<Artifacts, LabError> {
    let cert = make_certificate(cfg, a)?;
    let seq = lambda_k_sequence(a, cert.k, cert.n).context("sequence up to N")?;
    let mut t = Table::new(&["n", "a_n", "inf_so_far"])?;
    for (i, (v, m)) in seq.values.iter().zip(&seq.inf_so_far).enumerate() {
        t.row([(i + 1).to_string(), cell(*v), cell(*m)])?;
    }
    Ok(Artifacts { result: json!({ "certificate": certificate_json(&cert) }), csv: t.finish()? })
}

fn family_counts<'a>(families: impl Iterator<Item = &'a PerturbationFamily>) -> Value {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for f in families {
        *counts.entry(f.as_str()).or_default() += 1;
    }
    json!(counts)
}

fn sweep(cfg: &ExperimentConfig, a: &Cocycle<FiniteCyclicBase>) -> Result<Artifacts, LabError> {
    let cert = make_certificate(cfg, a)?;
    let prepared = BallSampler::new(seed(cfg)).prepare(a).context("sampler")?;
    let spectrum_a = integrated_spectrum(a).context("spectrum of A")?;
    let reports = (0..cfg.trials())
        .into_par_iter()
        .map(|t| verify_trial(&prepared, a, &cert, &spectrum_a, t))
        .collect::<cocycle_core::Result<Vec<_>>>()
        .context("sweep trial")?;
    let summary = VerificationSummary::from_reports(&cert, reports);
    let mut t =
        Table::new(&["trial", "family", "radius", "rho", "tau", "lambda_k_A", "lambda_k_B", "gap", "method"])?;
    for r in &summary.reports {
        t.row([
            r.trial.to_string(),
            r.family.as_str().into(),
            cell(r.radius),
            cell(r.rho),
            cell(r.tau),
            cell(r.lambda_k_a),
            cell(r.lambda_k_b),
            cell(r.gap),
            spectrum_a.method.as_str().into(),
        ])?;
    }
    let min_gap = summary.reports.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let result = json!({
        "certificate": certificate_json(&cert),
        "trials": summary.reports.len(),
        "max_gap": num(summary.max_gap),
        "min_gap": num(min_gap),
        "allowed_gap": num(summary.allowed_gap),
        "violations": summary.violations,
        "families": family_counts(summary.reports.iter().map(|r| &r.family)),
    });
    Ok(Artifacts { result, csv: t.finish()? })
}

/// Eigenvalue moduli of the monodromy through `atom`, from the rescaled product.
pub fn monodromy_moduli(b: &Cocycle<FiniteCyclicBase>, atom: usize) -> cocycle_core::Result<Vec<f64>> {
    let period = b.base().period(atom);
    let (m, e) = b.scaled_product(atom, period)?.eigen_ready();
    let shift = e as f64 * std::f64::consts::LN_2;
    Ok(eigenvalues(&m)?.iter().map(|e| (e.modulus().ln() + shift).exp()).collect())
}

/// Constant over an `n`-cycle, so the base may be resized freely.
fn is_constant(a: &Cocycle<FiniteCyclicBase>) -> bool {
    let g = a.generators();
    let n = a.base().n_atoms();
    g.iter().all(|m| *m == g[0]) && FiniteCyclicBase::cyclic(n).is_ok_and(|c| c == *a.base())
}

fn collapse(cfg: &ExperimentConfig, a: &Cocycle<FiniteCyclicBase>) -> Result<Artifacts, LabError> {
    let radii = cfg.radii.as_deref().expect("validated: radii present");
    let d = a.dim();
    let constant = is_constant(a);
    let witnesses: Vec<CollapseWitness> = radii
        .par_iter()
        .map(|&r| {
            if constant {
                constant_collapse(&a.generators()[0], r, cfg.n_max())
            } else {
                collapse_witness(a, r)
            }
        })
        .collect::<cocycle_core::Result<_>>()
        .context("collapse witness")?;
    let mut header = vec!["radius".to_string(), "n_atoms".into(), "atom".into()];
    header.extend(["tau_1", "rho_1", "tau_inf", "rho_inf", "max_modulus_deviation"].map(String::from));
    header.extend((1..=d).map(|i| format!("lambda_{i}")));
    let mut t = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>())?;
    let mut records = Vec::new();
    for (&r, w) in radii.iter().zip(&witnesses) {
        let atom = w.atom.unwrap_or(0);
        let moduli = monodromy_moduli(&w.b, atom).context("monodromy of B")?;
        let deviation = moduli.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
        let n_atoms = w.b.base().n_atoms();
        let mut row = vec![
            cell(r),
            n_atoms.to_string(),
            w.atom.map(|x| x.to_string()).unwrap_or_default(),
            cell(w.metric_1.tau),
            cell(w.metric_1.rho),
            cell(w.metric_inf.tau),
            cell(w.metric_inf.rho),
            cell(deviation),
        ];
        row.extend(w.spectrum.exponents.iter().map(|&x| cell(x)));
        t.row(row)?;
        records.push(json!({
            "radius": num(r),
            "n_atoms": n_atoms,
            "atom": w.atom,
            "rotation": w.rotation.as_ref().map(|m| m.rows()),
            "tau_1": num(w.metric_1.tau),
            "rho_1": num(w.metric_1.rho),
            "tau_inf": num(w.metric_inf.tau),
            "rho_inf": num(w.metric_inf.rho),
            "exponents": nums(&w.spectrum.exponents),
            "monodromy_moduli": nums(&moduli),
            "max_modulus_deviation": num(deviation),
        }));
    }
    Ok(Artifacts { result: json!({ "constant_input": constant, "witnesses": records }), csv: t.finish()? })
}

fn profile(cfg: &ExperimentConfig, a: &Cocycle<FiniteCyclicBase>) -> Result<Artifacts, LabError> {
    let radii = cfg.radii.as_deref().expect("validated: radii present");
    let (k, p, trials) = (cfg.k_or(1), cfg.p_exponent(), cfg.trials());
    let prepared = BallSampler::new(seed(cfg)).prepare(a).context("sampler")?;
    let lambda_k_a = lambda_k(a, k).context("lambda_k of A")?;
    let lambda_d_a = lambda_d_logdet(a).context("lambda_d of A")?;
    let opts = certificate_options(cfg);
    let mut t = Table::new(&[
        "radius",
        "samples",
        "collapse_included",
        "inf_lambda_k",
        "sup_lambda_k",
        "width",
        "sup_abs_delta_lambda_d",
        "epsilon_r",
        "c",
        "upper_bound",
    ])?;
    let mut rows = Vec::new();
    for (i, &r) in radii.iter().enumerate() {
        let mut row = profile_seed_row(a, k, p, r).context("profile seed")?;
        let samples = (0..trials)
            .into_par_iter()
            .map(|j| cocycle_core::lab::profile_trial(&prepared, k, p, r, lambda_d_a, i as u64 * trials + j))
            .collect::<cocycle_core::Result<Vec<_>>>()
            .context("profile trial")?;
        for (l, dd) in samples {
            row.absorb(l, dd);
        }
        // the certified bound at this radius; absent when no epsilon reaches it
        let bound = epsilon_for_radius(a, k, r, opts)
            .and_then(|eps| Ok((eps, semicontinuity_modulus_with(a, k, eps, LpExponent::ONE, opts)?.c)))
            .ok();
        let (eps, c, upper) = match bound {
            Some((eps, c)) => (eps, c, lambda_k_a + c * eps),
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        t.row([
            cell(r),
            row.samples.to_string(),
            row.collapse_included.to_string(),
            cell(row.inf_lambda_k),
            cell(row.sup_lambda_k),
            cell(row.width()),
            cell(row.sup_abs_delta_lambda_d),
            cell(eps),
            cell(c),
            cell(upper),
        ])?;
        rows.push(json!({
            "radius": num(r),
            "samples": row.samples,
            "collapse_included": row.collapse_included,
            "inf_lambda_k": num(row.inf_lambda_k),
            "sup_lambda_k": num(row.sup_lambda_k),
            "width": num(row.width()),
            "sup_abs_delta_lambda_d": num(row.sup_abs_delta_lambda_d),
            "epsilon_r": num(eps),
            "c": num(c),
            "upper_bound": num(upper),
        }));
    }
    let result = json!({
        "k": k,
        "p": p.to_string(),
        "lambda_k_a": num(lambda_k_a),
        "lambda_d_a": num(lambda_d_a),
        "rows": rows,
    });
    Ok(Artifacts { result, csv: t.finish()? })
}

/// Outcome of one proof replay.
struct ProofTrial {
    trial: u64,
    family: &'static str,
    tau_1: f64,
    checks: usize,
    worst: &'static str,
    min_slack: f64,
    g_complement: f64,
    lambda_k_b: f64,
    holds: bool,
    /// Minimum slack per inequality family.
    slack: BTreeMap<&'static str, f64>,
}

/// Relative slack `(bound − measured)/max(1, |bound|)`.
fn relative_slack(measured: f64, bound: f64) -> f64 {
    if bound.is_infinite() {
        return f64::INFINITY;
    }
    (bound - measured) / bound.abs().max(1.0)
}

fn replay(
    a: &Cocycle<FiniteCyclicBase>,
    b: &Cocycle<FiniteCyclicBase>,
    cert: &SemicontinuityCertificate,
    trial: u64,
    family: &'static str,
    tau_1: f64,
) -> cocycle_core::Result<ProofTrial> {
    let mut out = ProofTrial {
        trial,
        family,
        tau_1,
        checks: 0,
        worst: "",
        min_slack: f64::INFINITY,
        g_complement: f64::NAN,
        lambda_k_b: f64::NAN,
        holds: true,
        slack: BTreeMap::new(),
    };
    match proof_internals_check(a, b, cert) {
        Ok(d) => {
            out.checks = d.checks.len();
            out.g_complement = d.g_complement_measure;
            out.lambda_k_b = d.lambda_k_b;
            for c in &d.checks {
                let s = relative_slack(c.measured, c.bound);
                let e = out.slack.entry(c.name).or_insert(f64::INFINITY);
                *e = e.min(s);
                if s < out.min_slack {
                    out.min_slack = s;
                    out.worst = c.name;
                }
            }
        }
        Err(Error::ProofInequalityViolated { name, measured, bound }) => {
            out.holds = false;
            out.worst = name;
            out.min_slack = relative_slack(measured, bound);
            out.slack.insert(name, out.min_slack);
        }
        Err(e) => return Err(e),
    }
    Ok(out)
}

fn proof_check(
    cfg: &ExperimentConfig,
    a: &Cocycle<FiniteCyclicBase>,
    other: Option<&Cocycle<FiniteCyclicBase>>,
) -> Result<Artifacts, LabError> {
    let cert = make_certificate(cfg, a)?;
    let results: Vec<ProofTrial> = match other {
        Some(b) => {
            let tau_1 = cocycle_core::metrics::tau_p(a, b, LpExponent::ONE).context("distance")?;
            vec![replay(a, b, &cert, 0, "given", tau_1).context("proof replay")?]
        }
        None => {
            let prepared = BallSampler::new(seed(cfg)).prepare(a).context("sampler")?;
            // even trials sit just inside the boundary, odd ones anywhere in the ball
            let boundary = cert.delta_prime * (1.0 - 1e-9);
            (0..cfg.trials())
                .into_par_iter()
                .map(|t| {
                    let (s, family) = if t % 2 == 0 {
                        (prepared.sample_below_tau(boundary, t)?, "boundary")
                    } else {
                        let s = prepared.sample(cert.delta, LpExponent::ONE, t)?;
                        let f = s.family.as_str();
                        (s, f)
                    };
                    replay(a, &s.b, &cert, t, family, s.tau_1)
                })
                .collect::<cocycle_core::Result<_>>()
                .context("proof replay")?
        }
    };
    let mut t = Table::new(&[
        "trial",
        "family",
        "tau_1",
        "checks",
        "worst_check",
        "min_relative_slack",
        "g_complement_measure",
        "lambda_k_B",
        "holds",
    ])?;
    let mut family_slack: BTreeMap<&str, f64> = BTreeMap::new();
    for r in &results {
        t.row([
            r.trial.to_string(),
            r.family.into(),
            cell(r.tau_1),
            r.checks.to_string(),
            r.worst.into(),
            cell(r.min_slack),
            cell(r.g_complement),
            cell(r.lambda_k_b),
            r.holds.to_string(),
        ])?;
        for (name, s) in &r.slack {
            let e = family_slack.entry(name).or_insert(f64::INFINITY);
            *e = e.min(*s);
        }
    }
    let violations = results.iter().filter(|r| !r.holds).count();
    let slack: BTreeMap<&str, Value> = family_slack.into_iter().map(|(k, v)| (k, num(v))).collect();
    let result = json!({
        "certificate": certificate_json(&cert),
        "trials": results.len(),
        "violations": violations,
        "min_relative_slack": slack,
    });
    Ok(Artifacts { result, csv: t.finish()? })
}
