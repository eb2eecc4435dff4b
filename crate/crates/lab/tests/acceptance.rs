//! Acceptance suite: one PASS/FAIL line per criterion, then a single
//! assertion over all of them. Oracles come from nalgebra (singular values),
//! closed forms (diagonal and rotation cocycles) and the exact periodic route.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use cocycle_core::lab::{
    constant_collapse, proof_internals_check, semicontinuity_modulus, uniform_integrability_k, verify_semicontinuity,
    BallSampler,
};
use cocycle_core::linalg::{exterior_power, log_plus, operator_norm};
use cocycle_core::lyapunov::{
    exact_spectrum_periodic, lambda_d_logdet, lambda_k, qr_spectrum_estimate_with, QrOptions,
};
use cocycle_core::metrics::rho_p;
use cocycle_core::{families, BaseSystem, Cocycle, FiniteCyclicBase, LpExponent, Matrix};
use cocycle_lab::experiments::monodromy_moduli;
use cocycle_lab::{run, run_config, ExperimentConfig, ExperimentKind, RunRequest};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn diag_const(n: usize) -> Cocycle<FiniteCyclicBase> {
    families::diagonal_constant(n, &[2.0, 0.5]).unwrap()
}

fn na_singular_values(m: &Matrix) -> Vec<f64> {
    let mut sv: Vec<f64> =
        DMatrix::from_row_slice(m.dim(), m.dim(), m.as_slice()).singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Random weighted permutation base; weights are constant along cycles.
fn random_base(r: &mut ChaCha8Rng, n: usize) -> FiniteCyclicBase {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, r.random_range(0..=i));
    }
    let uniform = FiniteCyclicBase::uniform(perm.clone()).unwrap();
    let mut w = vec![0.0; n];
    for c in uniform.cycles() {
        let x = r.random_range(0.1..1.0);
        c.iter().for_each(|&i| w[i] = x);
    }
    let total: f64 = w.iter().sum();
    FiniteCyclicBase::new(w.iter().map(|x| x / total).collect(), perm).unwrap()
}

fn random_cocycle_on(r: &mut ChaCha8Rng, base: FiniteCyclicBase, d: usize) -> Cocycle<FiniteCyclicBase> {
    let gens = (0..base.n_atoms()).map(|_| families::random_gl(r, d, 50.0).unwrap()).collect();
    Cocycle::new(base, gens).unwrap()
}

/// `A` with each generator multiplied by `I + s·G`.
fn nearby(r: &mut ChaCha8Rng, a: &Cocycle<FiniteCyclicBase>, s: f64) -> Cocycle<FiniteCyclicBase> {
    let d = a.dim();
    let changes: Vec<(usize, Matrix)> = (0..a.generators().len())
        .map(|i| (i, Matrix::identity(d).add(&families::random_gl(r, d, 1e6).unwrap().scaled(s))))
        .collect();
    a.perturb_on_set(&changes).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let (mut worst, mut norm_violations) = (0.0f64, 0);
    for i in 0..10_000 {
        let d = 2 + i % 4;
        let m = families::random_gl(&mut r, d, 1e6).unwrap();
        let sv = na_singular_values(&m);
        let norm = operator_norm(&m);
        for k in 1..=d {
            let e = exterior_power(&m, k).unwrap().operator_norm();
            let prod: f64 = sv[..k].iter().product();
            worst = worst.max((e - prod).abs() / prod);
            // ‖∧^k M‖ ≤ ‖M‖^k up to rounding of the two evaluations
            if e > norm.powi(k as i32) * (1.0 + 1e-12) {
                norm_violations += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && norm_violations == 0 && elapsed < Duration::from_secs(30),
        format!("10000 matrices, max rel err {worst:.2e}, {norm_violations} norm violations, {elapsed:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let (mut min_slack, mut pairs) = (f64::INFINITY, 0);
    let mut by_k = [0usize; 6];
    let mut corrected_violations = 0;
    while pairs < 10_000 {
        let d = 2 + pairs % 4;
        let a = families::random_gl(&mut r, d, 1e4).unwrap();
        let s = 10f64.powf(r.random_range(-4.0..0.5));
        let b = a.add(&families::random_gl(&mut r, d, 1e6).unwrap().scaled(s));
        if !(b.determinant().abs() > 1e-12) {
            continue;
        }
        pairs += 1;
        let diff = operator_norm(&b.sub(&a));
        let inv_norm = operator_norm(&a.inverse().unwrap());
        for k in 1..=d {
            let lb = log_plus(exterior_power(&b, k).unwrap().operator_norm()).unwrap();
            let la = log_plus(exterior_power(&a, k).unwrap().operator_norm()).unwrap();
            let slack = la + k as f64 * diff - lb;
            min_slack = min_slack.min(slack);
            if slack < -1e-12 {
                by_k[k] += 1;
            }
            // B = A(I + A⁻¹(B − A)) gives the bound with ‖A⁻¹‖ as the Lipschitz factor
            if lb > la + k as f64 * diff * inv_norm + 1e-12 {
                corrected_violations += 1;
            }
        }
    }
    let violations: usize = by_k.iter().sum();
    // ∧² is not additive: det(A + E) picks up cross terms of size ‖A‖·‖E‖
    let a = Matrix::diagonal(&[1000.0, 1e-3]);
    let b = a.add(&Matrix::identity(2).scaled(0.1));
    let lhs = log_plus(exterior_power(&b, 2).unwrap().operator_norm()).unwrap();
    let rhs = log_plus(exterior_power(&a, 2).unwrap().operator_norm()).unwrap() + 2.0 * operator_norm(&b.sub(&a));
    outcome(
        violations == 0,
        format!(
            "10000 pairs, {violations} violations (k=1: {}, k=2: {}, k=3: {}, k=4: {}, k=5: {}), min slack {min_slack:.3e}; \
             diag(1000, 1e-3) + 0.1 I at k=2: {lhs:.3} > {rhs:.3}; with factor k*|A^-1|: {corrected_violations} violations",
            by_k[1], by_k[2], by_k[3], by_k[4], by_k[5]
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let (mut violations, mut checked) = (0, 0);
    let mut min_ratio = f64::INFINITY;
    for _ in 0..100 {
        let n = r.random_range(1..60);
        let base = random_base(&mut r, n);
        let w = base.weights().to_vec();
        let f: Vec<f64> =
            (0..n).map(|_| if r.random_bool(0.2) { r.random_range(0.0..40.0) } else { r.random_range(0.0..1.0) }).collect();
        let eta = 10f64.powf(r.random_range(-3.0..0.0));
        let ub = uniform_integrability_k(&base, &f, eta).unwrap();
        for _ in 0..1000 {
            // h ≥ 0 with ‖h − f‖₁ < η: a random mix of a spike, spread noise and removal
            let budget = eta * r.random_range(0.0..0.999_999);
            let mut h = f.clone();
            let spike = r.random_range(0.0..=1.0) * budget;
            let i = r.random_range(0..n);
            h[i] += spike / w[i];
            let mut rest = budget - spike;
            for x in 0..n {
                let share = rest * r.random_range(0.0..0.5);
                let change = if r.random_bool(0.5) { share / w[x] } else { -(share / w[x]).min(h[x]) };
                h[x] += change;
                rest -= (change * w[x]).abs();
            }
            let dist: f64 = (0..n).map(|x| w[x] * (h[x] - f[x]).abs()).sum();
            if !(dist < eta) {
                continue;
            }
            checked += 1;
            let tail: f64 = (0..n).filter(|&x| h[x] > ub.k).map(|x| w[x] * h[x]).sum();
            let mass: f64 = (0..n).filter(|&x| h[x] > ub.k).map(|x| w[x]).sum();
            min_ratio = min_ratio.min((2.0 * eta - tail) / eta);
            if !(tail < 2.0 * eta && mass < 2.0 * eta / ub.k) {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0 && checked > 90_000,
        format!("100 (f, eta), {checked} perturbations, {violations} violations, min tail slack {min_ratio:.3} eta"),
    )
}

fn criterion_4() -> Outcome {
    let s = exact_spectrum_periodic(&diag_const(7)).unwrap();
    let exact_diag = s.exponents == [std::f64::consts::LN_2, -std::f64::consts::LN_2];
    let mut r = rng(4);
    let (mut worst, mut worst_allowed, mut failures) = (0.0f64, 0.0f64, 0);
    for _ in 0..100 {
        let period = r.random_range(1..=50);
        let d = r.random_range(1..=4);
        let a = families::random_periodic(&mut r, period, d, false, 1e2).unwrap();
        let exact = exact_spectrum_periodic(&a).unwrap();
        let cycles = (4000 / period).max(40);
        let opts = QrOptions { transient: cycles * period, steps: cycles * period };
        let est = qr_spectrum_estimate_with(&a, 0, opts).unwrap();
        let err = est.exponents.iter().zip(&exact.exponents).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
        let allowed = est.error_bound.max(1e-8);
        worst_allowed = worst_allowed.max(allowed);
        if err > allowed {
            failures += 1;
        }
    }
    outcome(
        exact_diag && failures == 0 && worst <= 1e-8,
        format!(
            "diag(2,1/2) exact: {exact_diag}; 100 random periodic, max |QR - exact| {worst:.2e}, \
             {failures} outside max(1e-8, bound)"
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let mut cocycles = vec![
        diag_const(20),
        families::rotation_constant(5, 0.3).unwrap(),
        Cocycle::identity(FiniteCyclicBase::cyclic(4).unwrap(), 3).unwrap(),
    ];
    for _ in 0..20 {
        let n = r.random_range(1..12);
        let d = r.random_range(1..=4);
        let base = random_base(&mut r, n);
        cocycles.push(random_cocycle_on(&mut r, base, d));
    }
    let identity_err = cocycles
        .iter()
        .map(|a| (lambda_k(a, a.dim()).unwrap() - lambda_d_logdet(a).unwrap()).abs())
        .fold(0.0, f64::max);

    let radii = [0.1, 0.03, 0.01, 0.003];
    let ladder_a = [diag_const(20), families::random_periodic(&mut r, 4, 3, false, 20.0).unwrap()];
    let mut ok = identity_err <= 1e-9;
    let mut detail = format!("identity err {identity_err:.2e} on {} cocycles;", cocycles.len());
    for (j, a) in ladder_a.iter().enumerate() {
        let d = a.dim() as f64;
        let ld = lambda_d_logdet(a).unwrap();
        let s = BallSampler::new(50 + j as u64).prepare(a).unwrap();
        let sups: Vec<f64> = radii
            .iter()
            .enumerate()
            .map(|(i, &rad)| {
                (0..1000u64)
                    .map(|t| {
                        let b = s.sample(rad, LpExponent::ONE, i as u64 * 1000 + t).unwrap();
                        (lambda_k(&b.b, a.dim()).unwrap() - ld).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        let monotone = sups.windows(2).all(|w| w[1] < w[0]);
        let bounded = sups.iter().zip(&radii).all(|(s, rad)| *s < 10.0 * rad * d);
        ok &= monotone && bounded;
        let _ = write!(detail, " d={} sups {:?} monotone {monotone} bounded {bounded};", a.dim(), sups.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>());
    }
    outcome(ok, detail)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut r = rng(6);
    let random = loop {
        let a = families::random_periodic(&mut r, 3, 3, true, 20.0).unwrap();
        if a.base().is_ergodic() {
            break a;
        }
    };
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, a) in [("diag", diag_const(20)), ("random d=3", random)] {
        for k in 1..a.dim() {
            for eps in [0.05, 0.2] {
                let cert = match semicontinuity_modulus(&a, k, eps, LpExponent::ONE) {
                    Ok(c) => c,
                    Err(e) => {
                        ok = false;
                        lines.push(format!("{name} k={k} eps={eps}: no certificate ({e})"));
                        continue;
                    }
                };
                let seed = 600 + k as u64 * 10 + (eps * 100.0) as u64;
                let s = verify_semicontinuity(&a, &cert, &BallSampler::new(seed), 1000).unwrap();
                ok &= s.violations == 0 && s.max_gap < cert.c * eps;
                lines.push(format!(
                    "{name} k={k} eps={eps}: N={} delta={:.2e} C={} max gap {:.3e} < {:.3e}, {} violations",
                    cert.n, cert.delta, cert.c, s.max_gap, s.allowed_gap, s.violations
                ));
            }
        }
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(300);
    outcome(ok, format!("{elapsed:.2?}\n      {}", lines.join("\n      ")))
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let random = families::random_periodic(&mut r, 5, 3, true, 20.0).unwrap();
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, a, eps) in [("diag", diag_const(20), 0.1), ("random d=3", random, 0.05)] {
        let cert = semicontinuity_modulus(&a, 1, eps, LpExponent::ONE).unwrap();
        let s = BallSampler::new(70).prepare(&a).unwrap();
        let boundary = cert.delta_prime * (1.0 - 1e-9);
        let mut violations = 0;
        for t in 0..1000u64 {
            let b = if t % 2 == 0 {
                s.sample_below_tau(boundary, t).unwrap().b
            } else {
                s.sample(cert.delta, LpExponent::ONE, t).unwrap().b
            };
            if proof_internals_check(&a, &b, &cert).is_err() {
                violations += 1;
            }
        }
        ok &= violations == 0;
        lines.push(format!("{name}: N={} delta'={:.3e}, 1000 trials, {violations} violations", cert.n, cert.delta_prime));
    }
    outcome(ok, lines.join("; "))
}

fn criterion_8() -> Outcome {
    let m = Matrix::diagonal(&[2.0, 0.5]);
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [0.3, 0.1, 0.03] {
        let w = constant_collapse(&m, r, 100_000).unwrap();
        let atom = w.atom.unwrap_or(0);
        let moduli = monodromy_moduli(&w.b, atom).unwrap();
        let dev = moduli.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
        let zero = w.spectrum.exponents.iter().all(|e| e.abs() <= 1e-10);
        let this = w.metric_1.rho < r && dev <= 1e-10 && zero && w.metric_inf.rho > 0.3;
        ok &= this;
        parts.push(format!(
            "r={r}: n={} rho_1={:.4} rho_inf={:.4} |mod-1|={dev:.1e}",
            w.b.base().n_atoms(),
            w.metric_1.rho,
            w.metric_inf.rho
        ));
    }
    outcome(ok, parts.join("; "))
}

fn profile_config(values: &str, n: usize) -> ExperimentConfig {
    let text = format!(
        "schema_version = 1\nseed = 9\ntrials = 300\nk = 1\np = 1\nradii = [0.1, 0.03, 0.01]\n\
         [base]\nkind = \"cyclic\"\nn = {n}\n[cocycle]\n{values}\n"
    );
    ExperimentConfig::from_toml(&text).unwrap()
}

fn criterion_9() -> Outcome {
    // 600 atoms: the cheapest collapse of diag(2,1/2) then costs ρ_1 < 0.01
    let diag = run_config(ExperimentKind::Profile, &profile_config("kind = \"diagonal\"\nvalues = [2.0, 0.5]", 600))
        .unwrap()
        .result;
    let ln2 = std::f64::consts::LN_2;
    let mut ok = true;
    let mut parts = Vec::new();
    for row in diag["rows"].as_array().unwrap() {
        let (inf, sup, bound) =
            (row["inf_lambda_k"].as_f64().unwrap(), row["sup_lambda_k"].as_f64().unwrap(), row["upper_bound"].as_f64().unwrap());
        let radius = row["radius"].as_f64().unwrap();
        ok &= inf < 0.05 && sup <= bound && bound >= ln2;
        parts.push(format!("r={radius}: inf {inf:.2e} sup {sup:.4} <= {bound:.4}"));
    }
    let id = run_config(ExperimentKind::Profile, &profile_config("kind = \"identity\"\ndim = 2", 600)).unwrap().result;
    let last = id["rows"].as_array().unwrap().last().unwrap();
    let width = last["width"].as_f64().unwrap();
    ok &= last["radius"].as_f64() == Some(0.01) && width < 0.05;
    parts.push(format!("identity width at r=0.01: {width:.2e}"));
    outcome(ok, parts.join("; "))
}

fn criterion_10() -> Outcome {
    let mut r = rng(10);
    let ps = [LpExponent::ONE, LpExponent::new(2.0).unwrap(), LpExponent::new(4.0).unwrap(), LpExponent::Infinity];
    let (mut chain_violations, mut triangle_violations, mut worst_triangle) = (0, 0, f64::NEG_INFINITY);
    for _ in 0..10_000 {
        let n = r.random_range(1..10);
        let d = r.random_range(1..=3);
        let base = random_base(&mut r, n);
        let a = random_cocycle_on(&mut r, base, d);
        let s = 10f64.powf(r.random_range(-3.0..0.0));
        let b = nearby(&mut r, &a, s);
        let c = nearby(&mut r, &a, s);
        let rho: Vec<f64> = ps.iter().map(|&p| rho_p(&a, &b, p).unwrap().rho).collect();
        // weighted power means agree to rounding when all atoms carry the same value
        if rho.windows(2).any(|w| w[0] > w[1] * (1.0 + 1e-12)) {
            chain_violations += 1;
        }
        let ab = rho_p(&a, &b, LpExponent::ONE).unwrap().rho;
        let bc = rho_p(&b, &c, LpExponent::ONE).unwrap().rho;
        let ac = rho_p(&a, &c, LpExponent::ONE).unwrap().rho;
        worst_triangle = worst_triangle.max(ac - ab - bc);
        if ac > ab + bc + 1e-12 {
            triangle_violations += 1;
        }
    }
    outcome(
        chain_violations == 0 && triangle_violations == 0,
        format!(
            "10000 pairs: {chain_violations} chain violations; 10000 triples: {triangle_violations} triangle \
             violations (max excess {worst_triangle:.2e})"
        ),
    )
}

const DETERMINISM_CONFIGS: [(ExperimentKind, &str); 8] = [
    (ExperimentKind::Spectrum, "seed = 1\nsteps = 2000\nsamples = 4\n[base]\nkind = \"bernoulli\"\nprobabilities = [0.3, 0.7]\n[cocycle]\nkind = \"random\"\ndim = 3"),
    (ExperimentKind::LambdaSeq, "seed = 2\nk = 2\nn_max = 200\n[base]\nkind = \"cyclic\"\nn = 6\n[cocycle]\nkind = \"random\"\ndim = 3"),
    (ExperimentKind::Rho, "seed = 3\np = \"inf\"\n[base]\nkind = \"cyclic\"\nn = 6\n[cocycle]\nkind = \"random\"\ndim = 2\n[other]\nkind = \"random\"\ndim = 2"),
    (ExperimentKind::Certificate, "k = 1\nepsilon = 0.1\n[base]\nkind = \"cyclic\"\nn = 20\n[cocycle]\nkind = \"diagonal\"\nvalues = [2.0, 0.5]"),
    (ExperimentKind::Sweep, "seed = 4\ntrials = 300\nk = 1\nepsilon = 0.1\n[base]\nkind = \"cyclic\"\nn = 20\n[cocycle]\nkind = \"diagonal\"\nvalues = [2.0, 0.5]"),
    (ExperimentKind::Collapse, "radii = [0.3, 0.1]\n[base]\nkind = \"cyclic\"\nn = 1\n[cocycle]\nkind = \"diagonal\"\nvalues = [2.0, 0.5]"),
    (ExperimentKind::Profile, "seed = 5\ntrials = 100\nradii = [0.1, 0.03]\n[base]\nkind = \"cyclic\"\nn = 50\n[cocycle]\nkind = \"diagonal\"\nvalues = [2.0, 0.5]"),
    (ExperimentKind::ProofCheck, "seed = 6\ntrials = 100\nk = 1\nepsilon = 0.2\n[base]\nkind = \"cyclic\"\nn = 3\n[cocycle]\nkind = \"random\"\ndim = 3\nunimodular = true\nmax_condition = 20.0"),
];

fn run_into(dir: &Path, verb: ExperimentKind, config: &Path) -> Value {
    let req = RunRequest { verb, config_path: config.into(), out: Some(dir.into()), seed: None, trials: None };
    run(&req).unwrap().result
}

fn criterion_11() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut mismatches = Vec::new();
    for (verb, body) in DETERMINISM_CONFIGS {
        let config = tmp.path().join(format!("{}.toml", verb.verb()));
        std::fs::write(&config, format!("schema_version = 1\n{body}\n")).unwrap();
        let (one, two) = (tmp.path().join(format!("{}-1", verb.verb())), tmp.path().join(format!("{}-2", verb.verb())));
        run_into(&one, verb, &config);
        run_into(&two, verb, &config);
        for file in ["result.json", "trials.csv"] {
            if std::fs::read(one.join(file)).unwrap() != std::fs::read(two.join(file)).unwrap() {
                mismatches.push(format!("{verb}/{file}"));
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("8 experiments run twice; byte mismatches: {}", if mismatches.is_empty() { "none".into() } else { mismatches.join(", ") }),
    )
}

const UNATTAINABLE: [usize; 1] = [2];

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("exterior-power identity", criterion_1),
        ("exterior log+ Lipschitz bound", criterion_2),
        ("uniform-integrability cutoff", criterion_3),
        ("exact spectrum oracle and QR agreement", criterion_4),
        ("top-degree identity and continuity", criterion_5),
        ("semicontinuity certificate", criterion_6),
        ("proof internals", criterion_7),
        ("collapse witness", criterion_8),
        ("discontinuity signature", criterion_9),
        ("Holder chain and triangle inequality", criterion_10),
        ("determinism", criterion_11),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name} [{:.2?}]: {}", i + 1, start.elapsed(), o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    // criterion 2 is false for k ≥ 2 (see its counterexample line); it must keep reporting FAIL
    // rather than silently start passing, and everything else must pass
    println!("{} of {} criteria pass; expected unattainable: {UNATTAINABLE:?}", criteria.len() - failed.len(), criteria.len());
    assert_eq!(failed, UNATTAINABLE, "failed criteria differ from the expected unattainable set");
}
