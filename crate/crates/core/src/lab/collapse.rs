//! Spectrum-collapsing perturbations: one rotation inserted on one atom so
//! that the monodromy mixes expanding and contracting directions and all
//! exponents become equal.
//!
//! For `d = 2` the rotation `R = [[c, −s], [s, c]]` is chosen with
//! `trace(R·N) = 0`, where `N` is the monodromy that ends at the atom. Then
//! `R·N` has characteristic polynomial `λ² + det N`, so both eigenvalues share
//! the modulus `|det N|^{1/2}`. For `d > 2`, with `N = U Σ Vᵀ`, the orthogonal
//! map `R = V P Uᵀ` (`P` a signed cyclic permutation) makes `R·N` similar to
//! `P Σ`, whose `d`-th power is a multiple of the identity.

use alloc::vec::Vec;

use crate::base::{BaseSystem, FiniteCyclicBase};
use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::linalg::{operator_norm, svd, Matrix, ScaledMatrix};
use crate::lyapunov::{exact_spectrum_periodic, LyapunovSpectrum};
use crate::math;
use crate::metrics::{rho_p, LpExponent, MetricValue};

/// Spectral gap below which a spectrum counts as one-point.
pub const ONE_POINT_TOL: f64 = 1e-10;

/// Signed cyclic permutation `e_j ↦ e_{j+1}` with determinant one.
fn cyclic_shift(d: usize) -> Matrix {
    let mut p = Matrix::zeros(d);
    for j in 0..d - 1 {
        p[(j + 1, j)] = 1.0;
    }
    p[(0, d - 1)] = if d % 2 == 0 { -1.0 } else { 1.0 };
    p
}

/// Orthogonal `R` for which `R·N` has one-point spectrum, or `None` when
/// `N` already has it (`d = 2`, `trace N = 0`).
pub fn collapse_rotation(n: &Matrix) -> Result<Option<Matrix>> {
    let d = n.dim();
    if d == 1 {
        return Ok(None);
    }
    if d == 2 {
        let a = n[(0, 0)] + n[(1, 1)];
        let b = n[(0, 1)] - n[(1, 0)];
        if a == 0.0 {
            return Ok(None);
        }
        let h = math::hypot(a, b);
        let (mut c, mut s) = (b / h, -a / h);
        if c < 0.0 {
            c = -c;
            s = -s;
        }
        return Ok(Some(Matrix::rotation_cs(c, s)));
    }
    let (u, sigma, v) = svd(n);
    if !(sigma[d - 1] > 0.0) {
        return Err(Error::CollapseFailed { gap: f64::INFINITY });
    }
    Ok(Some(v.matmul(&cyclic_shift(d)).matmul(&u.transpose())))
}

/// Monodromy over the cycle that ends with `atom`, i.e. `A^n(T·atom)`.
fn monodromy_ending_at(a: &Cocycle<FiniteCyclicBase>, atom: usize) -> Result<ScaledMatrix> {
    let base = a.base();
    a.scaled_product(base.apply(atom)?, base.period(atom))
}

/// `(R, τ_1 contribution)` of inserting the collapse rotation at each charged atom.
pub fn collapse_candidates(a: &Cocycle<FiniteCyclicBase>) -> Result<Vec<(usize, Option<Matrix>, f64)>> {
    let base = a.base();
    let id = Matrix::identity(a.dim());
    let mut out = Vec::new();
    for (_, atoms) in base.charged_cycles() {
        for &j in atoms {
            let n = monodromy_ending_at(a, j)?;
            let r = collapse_rotation(&n.balanced().0)?;
            let cost = match &r {
                None => 0.0,
                Some(r) => {
                    let aj = &a.generators()[j];
                    let direct = operator_norm(&r.sub(&id).matmul(aj));
                    let inverse = operator_norm(&a.inverse_generators()[j].matmul(&r.transpose().sub(&id)));
                    base.weight(j) * (direct + inverse)
                }
            };
            out.push((j, r, cost));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct CollapseWitness {
    pub b: Cocycle<FiniteCyclicBase>,
    /// Atom carrying the inserted rotation (`None` if `A` was already one-point).
    pub atom: Option<usize>,
    pub rotation: Option<Matrix>,
    pub metric_1: MetricValue,
    pub metric_inf: MetricValue,
    pub spectrum: LyapunovSpectrum,
}

/// Cheapest single-atom collapse, regardless of budget.
pub fn cheapest_collapse(a: &Cocycle<FiniteCyclicBase>) -> Result<CollapseWitness> {
    if !a.base().is_ergodic() {
        return Err(Error::NotErgodic);
    }
    let zero = |p| MetricValue { tau: 0.0, rho: 0.0, p };
    let spectrum = exact_spectrum_periodic(a)?;
    if spectrum.gap() < ONE_POINT_TOL {
        return Ok(CollapseWitness {
            b: a.clone(),
            atom: None,
            rotation: None,
            metric_1: zero(LpExponent::ONE),
            metric_inf: zero(LpExponent::Infinity),
            spectrum,
        });
    }
    let candidates = collapse_candidates(a)?;
    let (atom, rotation, _) = candidates
        .into_iter()
        .min_by(|x, y| x.2.total_cmp(&y.2))
        .ok_or(Error::Unsupported("base without charged atoms"))?;
    let b = match &rotation {
        Some(r) => a.perturb_on_set(&[(atom, r.clone())])?,
        None => a.clone(),
    };
    let spectrum = exact_spectrum_periodic(&b)?;
    if !(spectrum.gap() < ONE_POINT_TOL) {
        return Err(Error::CollapseFailed { gap: spectrum.gap() });
    }
    Ok(CollapseWitness {
        metric_1: rho_p(a, &b, LpExponent::ONE)?,
        metric_inf: rho_p(a, &b, LpExponent::Infinity)?,
        b,
        atom: Some(atom),
        rotation,
        spectrum,
    })
}

/// Collapse witness with `ρ_1(A, B) < budget`.
///
/// When the budget is out of reach, the error suggests how many atoms a
/// uniform base needs for the same construction (exact for constant cocycles).
pub fn collapse_witness(a: &Cocycle<FiniteCyclicBase>, budget: f64) -> Result<CollapseWitness> {
    if !(budget > 0.0 && budget <= 1.0) {
        return Err(Error::Domain { what: "collapse budget", value: budget });
    }
    let w = cheapest_collapse(a)?;
    if w.metric_1.rho < budget {
        return Ok(w);
    }
    let n = a.base().n_atoms() as f64;
    let per_atom_cost = w.metric_1.tau * n;
    let tau_budget = budget / (1.0 - budget);
    let suggested = if tau_budget.is_finite() { (per_atom_cost / tau_budget) as usize + 1 } else { 1 };
    Err(Error::BudgetUnreachable { rho: w.metric_1.rho, budget, suggested_atoms: suggested })
}

pub fn collapse_perturbation(a: &Cocycle<FiniteCyclicBase>, budget: f64) -> Result<Cocycle<FiniteCyclicBase>> {
    Ok(collapse_witness(a, budget)?.b)
}

/// Constant cocycle `m` over the shortest cycle on which a collapse fits in
/// `budget`, together with its witness.
pub fn constant_collapse(m: &Matrix, budget: f64, n_max: usize) -> Result<CollapseWitness> {
    let mut n = 1;
    loop {
        let a = Cocycle::constant(FiniteCyclicBase::cyclic(n)?, m.clone())?;
        match collapse_witness(&a, budget) {
            Err(Error::BudgetUnreachable { rho, suggested_atoms, .. }) => {
                let next = suggested_atoms.max(n + n / 8 + 1);
                if next > n_max {
                    return Err(Error::BudgetUnreachable { rho, budget, suggested_atoms: next });
                }
                n = next;
            }
            other => return other,
        }
    }
}
