//! Replays the positive-case semicontinuity argument on a concrete pair
//! `(A, B)` and measures every intermediate inequality.
//!
//! With `f = log⁺‖A‖`, `g = log⁺‖B‖`, `E_h = {h ≤ K}` and
//! `G = ∩_{i<N} T⁻ⁱ(E_f ∩ E_g)`, the checked chain is:
//! - `‖g − f‖₁ < η`, `∫_{h>K} h < 2η` and `μ{h > K} < 2η/K` for `h = f, g`;
//! - `μ(G^c) ≤ N μ(E_f^c ∪ E_g^c) < 4ε/K`;
//! - `∫_{Tⁱ(G^c)} g < 6ε` for `i < N`, hence `(1/N)∫_{G^c} log⁺‖∧^k B^N‖ ≤ 6kε`;
//! - `∫_G ‖Bⁱ − Aⁱ‖ ≤ i e^{K(i−1)} δ'` for `i = 1..N`;
//! - `(1/N)∫_G log⁺‖∧^k B^N‖ ≤ Λ_k(A) + (2+k)ε`;
//! - `Λ_k(B) ≤ (1/N)∫ log⁺‖∧^k B^N‖ ≤ Λ_k(A) + (2+7k)ε`.

use alloc::vec;
use alloc::vec::Vec;

use super::certificate::{CertificateCase, SemicontinuityCertificate};
use crate::base::{BaseSystem, FiniteCyclicBase};
use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::linalg::{exterior_power, log_plus_norm, operator_norm, Matrix};
use crate::lyapunov::lambda_k;
use crate::math;
use crate::metrics::{tau_p, LpExponent};

/// One measured inequality `measured < bound` (or `≤` when not strict).
#[derive(Clone, Debug, PartialEq)]
pub struct InequalityCheck {
    pub name: &'static str,
    /// Step index for the per-step families, otherwise zero.
    pub index: usize,
    pub measured: f64,
    pub bound: f64,
    pub strict: bool,
}

impl InequalityCheck {
    pub fn holds(&self) -> bool {
        if self.strict {
            self.measured < self.bound
        } else {
            self.measured <= self.bound
        }
    }

    /// `bound − measured`.
    pub fn slack(&self) -> f64 {
        self.bound - self.measured
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProofDiagnostics {
    pub checks: Vec<InequalityCheck>,
    pub g_complement_measure: f64,
    pub lambda_k_b: f64,
}

impl ProofDiagnostics {
    pub fn family(&self, name: &str) -> impl Iterator<Item = &InequalityCheck> + '_ {
        let name = alloc::string::String::from(name);
        self.checks.iter().filter(move |c| c.name == name)
    }
}

/// Builds `E_f`, `E_g`, `G` for `B` in the certified ball and checks each
/// inequality of the argument; any failure is a hard error.
pub fn proof_internals_check(
    a: &Cocycle<FiniteCyclicBase>,
    b: &Cocycle<FiniteCyclicBase>,
    cert: &SemicontinuityCertificate,
) -> Result<ProofDiagnostics> {
    if cert.case != CertificateCase::Positive {
        return Err(Error::Unsupported("proof replay covers the positive case only"));
    }
    a.check_compatible(b)?;
    let tau_1 = tau_p(a, b, LpExponent::ONE)?;
    if !(tau_1 < cert.delta_prime) {
        return Err(Error::Domain { what: "tau_1(A, B) outside the certified ball", value: tau_1 });
    }
    let base = a.base();
    let w = base.weights();
    let n_atoms = base.n_atoms();
    let (k, n, big_k, eps, eta, dp) = (cert.k, cert.n, cert.big_k, cert.epsilon, cert.eta, cert.delta_prime);
    let kf = k as f64;
    let nf = n as f64;
    let integral = |vals: &dyn Fn(usize) -> f64, set: &dyn Fn(usize) -> bool| -> f64 {
        (0..n_atoms).filter(|&i| w[i] > 0.0 && set(i)).fold(0.0, |acc, i| acc + w[i] * vals(i))
    };

    let f: Vec<f64> = a.generators().iter().map(|m| log_plus_norm(operator_norm(m))).collect();
    let g: Vec<f64> = b.generators().iter().map(|m| log_plus_norm(operator_norm(m))).collect();
    let mut checks = Vec::new();
    let mut push = |name, index, measured, bound, strict| checks.push(InequalityCheck { name, index, measured, bound, strict });

    let gf: f64 = integral(&|i| (g[i] - f[i]).abs(), &|_| true);
    push("lemma_g_close_to_f", 0, gf, eta, true);
    for (name_int, name_mass, h) in [("lemma_tail_integral_f", "lemma_tail_mass_f", &f), ("lemma_tail_integral_g", "lemma_tail_mass_g", &g)] {
        push(name_int, 0, integral(&|i| h[i], &|i| h[i] > big_k), 2.0 * eta, true);
        push(name_mass, 0, integral(&|_| 1.0, &|i| h[i] > big_k), 2.0 * eta / big_k, true);
    }

    let in_e: Vec<bool> = (0..n_atoms).map(|i| f[i] <= big_k && g[i] <= big_k).collect();
    let perm = base.permutation();
    let in_g: Vec<bool> = (0..n_atoms)
        .map(|x| {
            let mut y = x;
            (0..n).all(|_| {
                let ok = in_e[y];
                y = perm[y];
                ok
            })
        })
        .collect();
    let mu_gc = integral(&|_| 1.0, &|i| !in_g[i]);
    let mu_ec = integral(&|_| 1.0, &|i| !in_e[i]);
    push("g_complement_union_bound", 0, mu_gc, nf * mu_ec, false);
    push("g_complement_measure", 0, nf * mu_ec, 4.0 * eps / big_k, true);

    // T^i(G^c) as an indicator
    let mut shifted = in_g.iter().map(|x| !x).collect::<Vec<bool>>();
    for i in 0..n {
        push("shifted_complement_integral", i, integral(&|j| g[j], &|j| shifted[j]), 6.0 * eps, true);
        let mut next = vec![false; n_atoms];
        for j in 0..n_atoms {
            if shifted[j] {
                next[perm[j]] = true;
            }
        }
        shifted = next;
    }

    // log⁺‖∧^k B^N‖ and ‖Bⁱ − Aⁱ‖ per atom
    let mut log_plus_bn = vec![0.0; n_atoms];
    let mut diff = vec![vec![0.0; n_atoms]; n];
    for x in 0..n_atoms {
        if w[x] == 0.0 {
            continue;
        }
        let mut pa = Matrix::identity(a.dim());
        let mut pb = Matrix::identity(a.dim());
        let mut y = x;
        for row in diff.iter_mut() {
            pa = a.generators()[y].matmul(&pa);
            pb = b.generators()[y].matmul(&pb);
            y = base.apply(y)?;
            row[x] = if in_g[x] { operator_norm(&pb.sub(&pa)) } else { 0.0 };
        }
        let s = b.scaled_product(x, n)?;
        let (m, e) = s.balanced();
        let l = exterior_power(&m, k)?.operator_norm();
        log_plus_bn[x] = if l > 0.0 {
            (math::ln(l) + kf * e as f64 * core::f64::consts::LN_2).max(0.0)
        } else {
            0.0
        };
    }
    push("complement_log_plus_bound", 0, integral(&|i| log_plus_bn[i], &|i| !in_g[i]) / nf, 6.0 * kf * eps, false);
    for (i, row) in diff.iter().enumerate() {
        let step = (i + 1) as f64;
        let bound = step * math::exp(big_k * (step - 1.0)) * dp;
        if !bound.is_finite() {
            continue;
        }
        push("induction_bound", i + 1, integral(&|j| row[j], &|j| in_g[j]), bound, false);
    }
    let lam_a = cert.lambda_k;
    push("good_set_log_plus_bound", 0, integral(&|i| log_plus_bn[i], &|i| in_g[i]) / nf, lam_a + (2.0 + kf) * eps, false);
    let total = integral(&|i| log_plus_bn[i], &|_| true) / nf;
    let lambda_k_b = lambda_k(b, k)?;
    push("lambda_below_finite_time", 0, lambda_k_b, total + 1e-12 * (1.0 + total.abs()), false);
    push("final_bound", 0, total, lam_a + (2.0 + 7.0 * kf) * eps, false);

    if let Some(bad) = checks.iter().find(|c| !c.holds()) {
        return Err(Error::ProofInequalityViolated { name: bad.name, measured: bad.measured, bound: bad.bound });
    }
    Ok(ProofDiagnostics { checks, g_complement_measure: mu_gc, lambda_k_b })
}
