//! The uniform-integrability cutoff: given `f ≥ 0` and `η > 0`, a level `K`
//! such that every `h ≥ 0` with `‖h − f‖₁ < η` has `∫_{h>K} h < 2η`.

use alloc::vec::Vec;

use crate::base::FiniteCyclicBase;
use crate::error::{Error, Result};

/// `γ` with `μ(Z) < γ ⇒ ∫_Z f < η`, and `K = (‖f‖₁ + η)/γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformBound {
    pub gamma: f64,
    pub k: f64,
    pub norm_f: f64,
    /// `γ` is the exact optimum (equal atom weights) rather than the
    /// rearrangement lower bound.
    pub exact: bool,
}

/// Cutoff for `f` on a finite base.
pub fn uniform_integrability_k(base: &FiniteCyclicBase, f: &[f64], eta: f64) -> Result<UniformBound> {
    uniform_integrability_weighted(base.weights(), f, eta)
}

/// Cutoff for `f` against arbitrary (possibly sub-probability) atom weights.
///
/// With equal positive weights `w`, `γ = j·w` where `j` is the fewest atoms
/// whose `f`-mass reaches `η`; this is the largest admissible `γ`. Otherwise
/// `γ` is where `∫_0^γ f*` reaches `η` for the decreasing rearrangement
/// `f*`, which is admissible but may be smaller than optimal.
pub fn uniform_integrability_weighted(weights: &[f64], f: &[f64], eta: f64) -> Result<UniformBound> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain { what: "eta", value: eta });
    }
    if weights.len() != f.len() {
        return Err(Error::DimensionMismatch { expected: weights.len(), found: f.len() });
    }
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for (i, (&w, &v)) in weights.iter().zip(f).enumerate() {
        if w == 0.0 {
            continue;
        }
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::NonFiniteIntegrand { at: i });
        }
        atoms.push((w, v));
    }
    let total_mass: f64 = atoms.iter().map(|a| a.0).sum();
    let norm_f: f64 = atoms.iter().map(|(w, v)| w * v).sum();
    if !(total_mass > 0.0) {
        return Err(Error::InvalidWeights(alloc::string::String::from("no atom carries mass")));
    }
    atoms.sort_by(|a, b| b.1.total_cmp(&a.1));
    let equal = atoms.iter().all(|a| a.0 == atoms[0].0);

    let mut gamma = total_mass;
    let mut cum_mass = 0.0;
    let mut cum_int = 0.0;
    for &(w, v) in &atoms {
        if cum_int + w * v >= eta {
            gamma = if equal { cum_mass + w } else { cum_mass + (eta - cum_int) / v };
            break;
        }
        cum_mass += w;
        cum_int += w * v;
    }
    Ok(UniformBound { gamma, k: (norm_f + eta) / gamma, norm_f, exact: equal })
}
