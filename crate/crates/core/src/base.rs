//! Measure-preserving invertible base dynamics `T` on a probability space.
//!
//! Two families are provided:
//! - [`FiniteCyclicBase`]: a permutation of finitely many weighted atoms.
//!   Integrals are exact weighted sums, and every orbit is periodic, which
//!   makes Lyapunov quantities exactly computable.
//! - [`SampledBase`]: a two-sided Bernoulli or stationary Markov shift over a
//!   finite alphabet. Points are addressed by an orbit id and a time index;
//!   symbols are generated deterministically from the seed, so any point can
//!   be revisited. Integrals of general functions are Monte Carlo estimates.
//!
//! Cocycles read their value at a point through [`BaseSystem::label`], an
//! index into their list of generator matrices (the atom for finite bases,
//! the current symbol for shifts). Functions of the cocycle value are then
//! integrated exactly against [`BaseSystem::label_weights`].

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math;

/// Tolerance on `Σ weights = 1` and on weight invariance.
pub const WEIGHT_TOL: f64 = 1e-12;

/// An invertible measure-preserving map together with the labelling used by
/// cocycles over it.
pub trait BaseSystem: Clone + PartialEq + Debug {
    type Point: Copy + PartialEq + Debug;

    fn apply(&self, x: Self::Point) -> Result<Self::Point>;

    fn apply_inverse(&self, x: Self::Point) -> Result<Self::Point>;

    /// Index of the generator matrix that acts at `x`.
    fn label(&self, x: Self::Point) -> Result<usize>;

    fn n_labels(&self) -> usize;

    /// Law of the label under the invariant measure.
    fn label_weights(&self) -> &[f64];

    /// Labels at `x, Tx, …, T^{n-1}x`.
    fn orbit_labels(&self, x: Self::Point, n: usize) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(n);
        let mut p = x;
        for _ in 0..n {
            out.push(self.label(p)?);
            p = self.apply(p)?;
        }
        Ok(out)
    }

    /// The system for `T⁻¹`, and for each of its labels the label of the
    /// original system whose generator acts at `T⁻¹x`.
    fn inverse_system(&self) -> (Self, Vec<usize>);

    fn is_ergodic(&self) -> bool;
}

/// Permutation of `n` weighted atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteCyclicBase {
    weights: Vec<f64>,
    permutation: Vec<usize>,
    inverse: Vec<usize>,
    cycles: Vec<Vec<usize>>,
    cycle_of: Vec<usize>,
}

impl FiniteCyclicBase {
    /// `n` atoms of weight `1/n`, with `i -> i+1 mod n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidWeights("a base needs at least one atom".to_string()));
        }
        let w = 1.0 / n as f64;
        Self::new(vec![w; n], (0..n).map(|i| (i + 1) % n).collect())
    }

    /// Uniform weights with an arbitrary permutation.
    pub fn uniform(permutation: Vec<usize>) -> Result<Self> {
        let n = permutation.len();
        if n == 0 {
            return Err(Error::InvalidWeights("a base needs at least one atom".to_string()));
        }
        Self::new(vec![1.0 / n as f64; n], permutation)
    }

    pub fn new(weights: Vec<f64>, permutation: Vec<usize>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::InvalidWeights("a base needs at least one atom".to_string()));
        }
        if permutation.len() != n {
            return Err(Error::InvalidPermutation(alloc::format!(
                "{} images for {n} atoms",
                permutation.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidWeights(alloc::format!("weight {w} is not a finite non-negative number")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidWeights(alloc::format!("weights sum to {total}, not 1")));
        }
        let mut inverse = vec![usize::MAX; n];
        for (i, &j) in permutation.iter().enumerate() {
            if j >= n {
                return Err(Error::InvalidPermutation(alloc::format!("image {j} of atom {i} out of range")));
            }
            if inverse[j] != usize::MAX {
                return Err(Error::InvalidPermutation(alloc::format!("atom {j} has two preimages")));
            }
            inverse[j] = i;
        }
        for i in 0..n {
            if (weights[permutation[i]] - weights[i]).abs() > WEIGHT_TOL {
                return Err(Error::NotMeasurePreserving { atom: i });
            }
        }
        let mut cycle_of = vec![usize::MAX; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if cycle_of[start] != usize::MAX {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            loop {
                cycle_of[i] = cycles.len();
                cycle.push(i);
                i = permutation[i];
                if i == start {
                    break;
                }
            }
            cycles.push(cycle);
        }
        Ok(Self { weights, permutation, inverse, cycles, cycle_of })
    }

    pub fn n_atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Cycles of the permutation, each listed in orbit order from its smallest atom.
    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn cycle_of(&self, atom: usize) -> usize {
        self.cycle_of[atom]
    }

    pub fn cycle_mass(&self, cycle: usize) -> f64 {
        self.cycles[cycle].iter().map(|&i| self.weights[i]).sum()
    }

    /// Length of the orbit through `atom`.
    pub fn period(&self, atom: usize) -> usize {
        self.cycles[self.cycle_of[atom]].len()
    }

    /// Cycles carrying positive mass.
    pub fn charged_cycles(&self) -> impl Iterator<Item = (usize, &[usize])> + '_ {
        self.cycles
            .iter()
            .enumerate()
            .filter(|(c, _)| self.cycle_mass(*c) > 0.0)
            .map(|(c, atoms)| (c, atoms.as_slice()))
    }

    fn check(&self, atom: usize) -> Result<()> {
        if atom < self.n_atoms() {
            Ok(())
        } else {
            Err(Error::InvalidPoint { point: atom, n_atoms: self.n_atoms() })
        }
    }

    /// The same atoms and weights under `T⁻¹`.
    pub fn inverse_base(&self) -> Self {
        Self::new(self.weights.clone(), self.inverse.clone()).expect("inverse of a valid base is valid")
    }

    /// Exact `∫ f dμ = Σ weight[i]·f(i)`; atoms of zero weight are skipped.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let v = f(i);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { at: i });
            }
            acc += w * v;
        }
        Ok(acc)
    }

    /// `(μ{f > c}, ∫_{f > c} f dμ)` for `f` given atom-wise.
    pub fn sub_level_measure(&self, f: &[f64], c: f64) -> Result<(f64, f64)> {
        if f.len() != self.n_atoms() {
            return Err(Error::DimensionMismatch { expected: self.n_atoms(), found: f.len() });
        }
        let mut mass = 0.0;
        let mut integral = 0.0;
        for (i, (&w, &v)) in self.weights.iter().zip(f).enumerate() {
            if w == 0.0 {
                continue;
            }
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { at: i });
            }
            if v > c {
                mass += w;
                integral += w * v;
            }
        }
        Ok((mass, integral))
    }
}

impl BaseSystem for FiniteCyclicBase {
    type Point = usize;

    fn apply(&self, x: usize) -> Result<usize> {
        self.check(x)?;
        Ok(self.permutation[x])
    }

    fn apply_inverse(&self, x: usize) -> Result<usize> {
        self.check(x)?;
        Ok(self.inverse[x])
    }

    fn label(&self, x: usize) -> Result<usize> {
        self.check(x)?;
        Ok(x)
    }

    fn n_labels(&self) -> usize {
        self.n_atoms()
    }

    fn label_weights(&self) -> &[f64] {
        &self.weights
    }

    fn orbit_labels(&self, x: usize, n: usize) -> Result<Vec<usize>> {
        self.check(x)?;
        let mut out = Vec::with_capacity(n);
        let mut p = x;
        for _ in 0..n {
            out.push(p);
            p = self.permutation[p];
        }
        Ok(out)
    }

    fn inverse_system(&self) -> (Self, Vec<usize>) {
        (self.inverse_base(), self.inverse.clone())
    }

    fn is_ergodic(&self) -> bool {
        self.charged_cycles().count() == 1
    }
}

/// Kind of symbolic shift.
#[derive(Clone, Debug, PartialEq)]
pub enum ShiftKind {
    /// Independent symbols with the given marginal.
    Bernoulli,
    /// Stationary Markov chain; rows of the forward and time-reversed kernels.
    Markov { transition: Vec<Vec<f64>>, reversed: Vec<Vec<f64>> },
}

/// A point of a sampled shift: orbit id and time index along it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SampledPoint {
    pub orbit: u64,
    pub index: i64,
}

impl SampledPoint {
    pub fn new(orbit: u64, index: i64) -> Self {
        Self { orbit, index }
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Two-sided Bernoulli or Markov shift with seeded, replayable orbits.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledBase {
    kind: ShiftKind,
    marginal: Vec<f64>,
    seed: u64,
    /// `+1` for the shift, `-1` for its inverse.
    direction: i64,
    /// Cocycles read the symbol at `index + read_offset`.
    read_offset: i64,
}

impl SampledBase {
    pub fn bernoulli(probabilities: Vec<f64>, seed: u64) -> Result<Self> {
        check_probability_row(&probabilities, "marginal")?;
        Ok(Self { kind: ShiftKind::Bernoulli, marginal: probabilities, seed, direction: 1, read_offset: 0 })
    }

    /// Stationary Markov shift; the chain must be irreducible.
    pub fn markov(transition: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        let n = transition.len();
        if n == 0 {
            return Err(Error::InvalidChain("empty alphabet".to_string()));
        }
        for row in &transition {
            if row.len() != n {
                return Err(Error::InvalidChain("transition matrix is not square".to_string()));
            }
            check_probability_row(row, "transition row")?;
        }
        if !irreducible(&transition) {
            return Err(Error::InvalidChain("transition matrix is not irreducible".to_string()));
        }
        let stationary = stationary_distribution(&transition)?;
        let reversed = (0..n)
            .map(|i| (0..n).map(|j| stationary[j] * transition[j][i] / stationary[i]).collect())
            .collect();
        Ok(Self {
            kind: ShiftKind::Markov { transition, reversed },
            marginal: stationary,
            seed,
            direction: 1,
            read_offset: 0,
        })
    }

    pub fn kind(&self) -> &ShiftKind {
        &self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn alphabet_size(&self) -> usize {
        self.marginal.len()
    }

    /// Stationary law of a single coordinate.
    pub fn marginal(&self) -> &[f64] {
        &self.marginal
    }

    /// Same shift with an independent seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn symbol_at(&self, orbit: u64, index: i64) -> usize {
        self.window(orbit, index, index)[0]
    }

    /// Symbols at time indices `lo..=hi` of `orbit`.
    pub fn window(&self, orbit: u64, lo: i64, hi: i64) -> Vec<usize> {
        debug_assert!(lo <= hi);
        let len = (hi - lo + 1) as usize;
        let mut out = vec![0usize; len];
        match &self.kind {
            ShiftKind::Bernoulli => {
                if hi >= 0 {
                    let start = lo.max(0);
                    let mut rng = self.stream(orbit, false, start as u64);
                    for j in start..=hi {
                        out[(j - lo) as usize] = sample_row(&self.marginal, rng.random());
                    }
                }
                if lo < 0 {
                    let top = hi.min(-1);
                    // negative index j lives at position -j-1 of the backward stream
                    let mut rng = self.stream(orbit, true, (-top - 1) as u64);
                    let mut j = top;
                    while j >= lo {
                        out[(j - lo) as usize] = sample_row(&self.marginal, rng.random());
                        j -= 1;
                    }
                }
            }
            ShiftKind::Markov { transition, reversed } => {
                let mut fwd = self.stream(orbit, false, 0);
                let s0 = sample_row(&self.marginal, fwd.random());
                if lo <= 0 && 0 <= hi {
                    out[(-lo) as usize] = s0;
                }
                let mut s = s0;
                for j in 1..=hi.max(0) {
                    s = sample_row(&transition[s], fwd.random());
                    if j >= lo {
                        out[(j - lo) as usize] = s;
                    }
                }
                if lo < 0 {
                    let mut bwd = self.stream(orbit, true, 0);
                    let mut s = s0;
                    let mut j = -1;
                    while j >= lo {
                        s = sample_row(&reversed[s], bwd.random());
                        if j <= hi {
                            out[(j - lo) as usize] = s;
                        }
                        j -= 1;
                    }
                }
            }
        }
        out
    }

    /// Uniform stream for one orbit half, positioned at draw `pos`.
    fn stream(&self, orbit: u64, backward: bool, pos: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(orbit.wrapping_mul(2).wrapping_add(backward as u64));
        rng.set_word_pos(2 * pos as u128);
        rng
    }

    /// Monte Carlo estimate of `∫ f dμ` from `samples` independent orbit starts.
    pub fn integrate(&self, f: impl Fn(SampledPoint) -> f64, samples: usize) -> Result<MonteCarloEstimate> {
        if samples == 0 {
            return Err(Error::Domain { what: "sample budget", value: 0.0 });
        }
        // Welford
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for (count, orbit) in (0..samples as u64).enumerate() {
            let v = f(SampledPoint::new(orbit, 0));
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { at: orbit as usize });
            }
            let delta = v - mean;
            mean += delta / (count + 1) as f64;
            m2 += delta * (v - mean);
        }
        let var = if samples > 1 { m2 / (samples - 1) as f64 } else { 0.0 };
        Ok(MonteCarloEstimate { mean, std_error: math::sqrt(var / samples as f64), samples })
    }
}

impl BaseSystem for SampledBase {
    type Point = SampledPoint;

    fn apply(&self, x: SampledPoint) -> Result<SampledPoint> {
        Ok(SampledPoint::new(x.orbit, x.index + self.direction))
    }

    fn apply_inverse(&self, x: SampledPoint) -> Result<SampledPoint> {
        Ok(SampledPoint::new(x.orbit, x.index - self.direction))
    }

    fn label(&self, x: SampledPoint) -> Result<usize> {
        Ok(self.symbol_at(x.orbit, x.index + self.read_offset))
    }

    fn n_labels(&self) -> usize {
        self.alphabet_size()
    }

    fn label_weights(&self) -> &[f64] {
        &self.marginal
    }

    fn orbit_labels(&self, x: SampledPoint, n: usize) -> Result<Vec<usize>> {
        if n == 0 {
            return Ok(Vec::new());
        }
        let first = x.index + self.read_offset;
        let last = first + self.direction * (n as i64 - 1);
        let (lo, hi) = if first <= last { (first, last) } else { (last, first) };
        let window = self.window(x.orbit, lo, hi);
        Ok((0..n as i64)
            .map(|j| window[(first + self.direction * j - lo) as usize])
            .collect())
    }

    fn inverse_system(&self) -> (Self, Vec<usize>) {
        let inv = Self {
            direction: -self.direction,
            read_offset: self.read_offset - self.direction,
            ..self.clone()
        };
        (inv, (0..self.alphabet_size()).collect())
    }

    fn is_ergodic(&self) -> bool {
        // Bernoulli shifts are mixing; Markov shifts are built irreducible.
        true
    }
}

fn check_probability_row(row: &[f64], what: &str) -> Result<()> {
    if row.is_empty() {
        return Err(Error::InvalidChain(alloc::format!("{what} is empty")));
    }
    if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidChain(alloc::format!("{what} has a negative or non-finite entry")));
    }
    let s: f64 = row.iter().sum();
    if (s - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::InvalidChain(alloc::format!("{what} sums to {s}, not 1")));
    }
    Ok(())
}

fn sample_row(probabilities: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probabilities.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

fn irreducible(p: &[Vec<f64>]) -> bool {
    let n = p.len();
    let reach = |from: usize, forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let edge = if forward { p[i][j] } else { p[j][i] };
                if edge > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(0, true) && reach(0, false)
}

/// Solves `π P = π`, `Σ π = 1`.
fn stationary_distribution(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    // rows 0..n-1: (Pᵀ - I) π = 0; last row: Σ π = 1
    let mut a = Matrix::zeros(n);
    for i in 0..n - 1 {
        for j in 0..n {
            a[(i, j)] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let inv = a.inverse().map_err(|_| Error::InvalidChain("stationary law is not unique".to_string()))?;
    let pi: Vec<f64> = (0..n).map(|i| inv[(i, n - 1)]).collect();
    if pi.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidChain("stationary law is not positive".to_string()));
    }
    let s: f64 = pi.iter().sum();
    Ok(pi.into_iter().map(|v| v / s).collect())
}
