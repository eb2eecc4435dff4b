//! Reproducible perturbations inside `ρ_p` balls.
//!
//! Uniform sampling in a `ρ_p` ball is not well defined, so three named
//! families are mixed: small rotations on random atom subsets, diagonal
//! multiplicative noise, and partial collapse rotations. The amplitude is
//! halved until the perturbation lands inside the ball. Each trial draws
//! from its own ChaCha stream, so trials can run in any order or in parallel.

use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::collapse::collapse_candidates;
use crate::base::{BaseSystem, FiniteCyclicBase};
use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math;
use crate::metrics::{rho_p, tau_p, LpExponent, MetricValue};

/// Amplitude halvings before a ball counts as unreachable.
pub const MAX_HALVINGS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PerturbationFamily {
    Identity,
    Rotation,
    DiagonalNoise,
    Collapse,
}

impl PerturbationFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Rotation => "rotation",
            Self::DiagonalNoise => "diagonal_noise",
            Self::Collapse => "collapse",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BallSampler {
    pub seed: u64,
}

/// A perturbed cocycle with its distance from the centre.
#[derive(Clone, Debug)]
pub struct BallSample {
    pub b: Cocycle<FiniteCyclicBase>,
    pub family: PerturbationFamily,
    /// Distance in the requested `p`.
    pub metric: MetricValue,
    pub tau_1: f64,
}

impl BallSampler {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// Independent stream for `trial`.
    pub fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        rng
    }

    /// Precomputes the per-atom collapse rotations of `a`.
    pub fn prepare<'a>(&self, a: &'a Cocycle<FiniteCyclicBase>) -> Result<PreparedSampler<'a>> {
        let collapse = if a.base().is_ergodic() {
            collapse_candidates(a)?.into_iter().filter_map(|(j, r, _)| r.map(|r| (j, r))).collect()
        } else {
            Vec::new()
        };
        Ok(PreparedSampler { sampler: *self, a, collapse })
    }
}

/// Random structure of one perturbation, scaled by an amplitude.
enum Shape {
    Rotation(Vec<(usize, usize, usize, f64)>),
    Diagonal(Vec<(usize, Vec<f64>)>),
    /// Atom and full collapse angle (`d = 2`).
    CollapseAngle(usize, f64),
    /// Atom and full collapse rotation (`d > 2`, applied only at full strength).
    CollapseFull(usize, Matrix),
}

pub struct PreparedSampler<'a> {
    sampler: BallSampler,
    a: &'a Cocycle<FiniteCyclicBase>,
    collapse: Vec<(usize, Matrix)>,
}

impl PreparedSampler<'_> {
    fn charged_atoms(&self) -> Vec<usize> {
        let w = self.a.base().weights();
        (0..w.len()).filter(|&i| w[i] > 0.0).collect()
    }

    fn random_subset(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let atoms = self.charged_atoms();
        let u: f64 = rng.random();
        let size = 1 + ((atoms.len() as f64) * u * u * u) as usize;
        let size = size.min(atoms.len());
        index::sample(rng, atoms.len(), size).into_iter().map(|i| atoms[i]).collect()
    }

    fn draw_shape(&self, rng: &mut ChaCha8Rng, family: PerturbationFamily) -> Shape {
        let d = self.a.dim();
        match family {
            PerturbationFamily::Collapse if !self.collapse.is_empty() => {
                let (atom, r) = &self.collapse[rng.random_range(0..self.collapse.len())];
                if d == 2 {
                    Shape::CollapseAngle(*atom, libm::atan2(r[(1, 0)], r[(0, 0)]))
                } else {
                    Shape::CollapseFull(*atom, r.clone())
                }
            }
            PerturbationFamily::DiagonalNoise => Shape::Diagonal(
                self.random_subset(rng)
                    .into_iter()
                    .map(|i| (i, (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()))
                    .collect(),
            ),
            _ => Shape::Rotation(
                self.random_subset(rng)
                    .into_iter()
                    .map(|i| {
                        let p = rng.random_range(0..d);
                        let q = (p + rng.random_range(1..d.max(2))) % d;
                        (i, p.min(q), p.max(q), rng.random_range(-1.0..1.0))
                    })
                    .collect(),
            ),
        }
    }

    /// Left factors at `amp`, or `None` if the shape has no such scaling.
    fn factors(&self, shape: &Shape, amp: f64) -> Option<Vec<(usize, Matrix)>> {
        let d = self.a.dim();
        match shape {
            Shape::Rotation(items) => Some(
                items
                    .iter()
                    .map(|&(i, p, q, t)| (i, if d == 1 { Matrix::identity(1) } else { Matrix::plane_rotation(d, p, q, amp * t) }))
                    .collect(),
            ),
            Shape::Diagonal(items) => Some(
                items
                    .iter()
                    .map(|(i, z)| (*i, Matrix::diagonal(&z.iter().map(|v| math::exp(amp * v)).collect::<Vec<_>>())))
                    .collect(),
            ),
            Shape::CollapseAngle(i, theta) => {
                let r = if amp == 1.0 {
                    let (_, r) = self.collapse.iter().find(|(j, _)| j == i)?;
                    r.clone()
                } else {
                    Matrix::rotation(amp * theta)
                };
                Some(alloc::vec![(*i, r)])
            }
            Shape::CollapseFull(i, r) => (amp == 1.0).then(|| alloc::vec![(*i, r.clone())]),
        }
    }

    fn build(&self, shape: &Shape, amp: f64) -> Result<Option<Cocycle<FiniteCyclicBase>>> {
        match self.factors(shape, amp) {
            Some(f) => Ok(Some(self.a.perturb_on_set(&f)?)),
            None => Ok(None),
        }
    }

    /// A perturbation `B` with `ρ_p(A, B) < radius`.
    pub fn sample(&self, radius: f64, p: LpExponent, trial: u64) -> Result<BallSample> {
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(Error::Domain { what: "ball radius", value: radius });
        }
        let mut rng = self.sampler.trial_rng(trial);
        let mut family = match rng.random_range(0..3) {
            0 => PerturbationFamily::Rotation,
            1 => PerturbationFamily::DiagonalNoise,
            _ => PerturbationFamily::Collapse,
        };
        if family == PerturbationFamily::Collapse && self.collapse.is_empty() {
            family = PerturbationFamily::Rotation;
        }
        let mut shape = self.draw_shape(&mut rng, family);
        let mut amp: f64 = 1.0;
        for _ in 0..MAX_HALVINGS {
            let Some(b) = self.build(&shape, amp)? else {
                // a full-strength-only shape that missed: fall back to rotations
                family = PerturbationFamily::Rotation;
                shape = self.draw_shape(&mut rng, family);
                continue;
            };
            let metric = rho_p(self.a, &b, p)?;
            if metric.rho < radius {
                // shrink once more at random so samples also fill the interior
                let u: f64 = rng.random();
                let (b, metric) = match self.build(&shape, amp * math::sqrt(u))? {
                    Some(inner) => {
                        let m = rho_p(self.a, &inner, p)?;
                        if m.rho < radius { (inner, m) } else { (b, metric) }
                    }
                    None => (b, metric),
                };
                let tau_1 = tau_p(self.a, &b, LpExponent::ONE)?;
                let family = if metric.tau == 0.0 { PerturbationFamily::Identity } else { family };
                return Ok(BallSample { b, family, metric, tau_1 });
            }
            amp *= 0.5;
        }
        Err(Error::SamplerDegenerate { radius })
    }

    /// A rotation perturbation with `τ_1(A, B)` just below `tau_target`.
    pub fn sample_below_tau(&self, tau_target: f64, trial: u64) -> Result<BallSample> {
        if !(tau_target > 0.0) {
            return Err(Error::Domain { what: "tau target", value: tau_target });
        }
        let mut rng = self.sampler.trial_rng(trial);
        let shape = self.draw_shape(&mut rng, PerturbationFamily::Rotation);
        let tau_at = |amp: f64| -> Result<(Cocycle<FiniteCyclicBase>, f64)> {
            let b = self.build(&shape, amp)?.expect("rotation shapes scale continuously");
            let t = tau_p(self.a, &b, LpExponent::ONE)?;
            Ok((b, t))
        };
        let mut hi = 1.0;
        let mut lo = None;
        for _ in 0..MAX_HALVINGS {
            let (b, t) = tau_at(hi)?;
            if t < tau_target {
                lo = Some((hi, b, t));
                break;
            }
            hi *= 0.5;
        }
        let (mut lo_amp, mut best, mut best_tau) = lo.ok_or(Error::SamplerDegenerate { radius: tau_target })?;
        let mut hi_amp = lo_amp * 2.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo_amp + hi_amp);
            let (b, t) = tau_at(mid)?;
            if t < tau_target {
                lo_amp = mid;
                best = b;
                best_tau = t;
            } else {
                hi_amp = mid;
            }
        }
        let metric = rho_p(self.a, &best, LpExponent::ONE)?;
        Ok(BallSample { b: best, family: PerturbationFamily::Rotation, metric, tau_1: best_tau })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn diag(n: usize) -> Cocycle<FiniteCyclicBase> {
        Cocycle::constant(FiniteCyclicBase::cyclic(n).unwrap(), Matrix::diagonal(&[2.0, 0.5])).unwrap()
    }

    #[test]
    fn samples_stay_inside_and_replay() {
        let a = diag(20);
        let s = BallSampler::new(3).prepare(&a).unwrap();
        let mut families = alloc::collections::BTreeSet::new();
        for trial in 0..60 {
            let x = s.sample(0.05, LpExponent::ONE, trial).unwrap();
            assert!(x.metric.rho < 0.05);
            families.insert(x.family.as_str());
            let y = s.sample(0.05, LpExponent::ONE, trial).unwrap();
            assert_eq!(x.b, y.b);
        }
        assert!(families.len() >= 3, "{families:?}");
    }

    #[test]
    fn tau_target_is_approached_from_below() {
        let a = diag(20);
        let s = BallSampler::new(9).prepare(&a).unwrap();
        let target = 1e-3 * (1.0 - 1e-9);
        let x = s.sample_below_tau(target, 4).unwrap();
        assert!(x.tau_1 < target && x.tau_1 > target * (1.0 - 1e-9));
    }

    #[test]
    fn rejects_bad_radius() {
        let a = diag(3);
        let s = BallSampler::new(0).prepare(&a).unwrap();
        assert!(s.sample(0.0, LpExponent::ONE, 0).is_err());
        assert!(s.sample(1.5, LpExponent::ONE, 0).is_err());
    }
}
