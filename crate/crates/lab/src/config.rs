//! Experiment configuration: a TOML file with a versioned schema.
//!
//! ```toml
//! schema_version = 1
//! seed = 7
//! trials = 1000
//! k = 1
//! p = 1            # or "inf"
//! epsilon = 0.1
//!
//! [base]
//! kind = "cyclic"  # cyclic | permutation | bernoulli | markov
//! n = 20
//!
//! [cocycle]
//! kind = "diagonal"
//! values = [2.0, 0.5]
//! ```

use std::fmt;
use std::path::PathBuf;

use cocycle_core::linalg::DEGENERATE_DET;
use cocycle_core::{families, Cocycle, FiniteCyclicBase, LpExponent, Matrix, SampledBase};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Spectrum,
    LambdaSeq,
    Rho,
    Certificate,
    Sweep,
    Collapse,
    Profile,
    ProofCheck,
}

impl ExperimentKind {
    pub const ALL: [Self; 8] = [
        Self::Spectrum,
        Self::LambdaSeq,
        Self::Rho,
        Self::Certificate,
        Self::Sweep,
        Self::Collapse,
        Self::Profile,
        Self::ProofCheck,
    ];

    /// The CLI verb.
    pub fn verb(&self) -> &'static str {
        match self {
            Self::Spectrum => "spectrum",
            Self::LambdaSeq => "lambda",
            Self::Rho => "rho",
            Self::Certificate => "certificate",
            Self::Sweep => "sweep",
            Self::Collapse => "collapse",
            Self::Profile => "profile",
            Self::ProofCheck => "proof-check",
        }
    }

    /// Whether the experiment draws random perturbations.
    pub fn samples_perturbations(&self) -> bool {
        matches!(self, Self::Sweep | Self::Profile | Self::ProofCheck)
    }

    fn needs_finite_base(&self) -> bool {
        !matches!(self, Self::Spectrum | Self::LambdaSeq | Self::Rho)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.verb())
    }
}

/// `p` as a number or the string `"inf"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PValue {
    Number(f64),
    Tag(String),
}

impl PValue {
    pub fn to_exponent(&self) -> Result<LpExponent, String> {
        match self {
            Self::Number(x) => LpExponent::new(*x).map_err(|_| format!("p = {x} is below 1")),
            Self::Tag(s) if s == "inf" => Ok(LpExponent::Infinity),
            Self::Tag(s) => Err(format!("p = {s:?} is neither a number nor \"inf\"")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseSpec {
    /// `n` equally weighted atoms, `i ↦ i+1 mod n`.
    Cyclic { n: usize },
    /// Arbitrary permutation; weights default to uniform.
    Permutation {
        permutation: Vec<usize>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
    Bernoulli {
        probabilities: Vec<f64>,
        #[serde(default)]
        seed: Option<u64>,
    },
    Markov {
        transition: Vec<Vec<f64>>,
        #[serde(default)]
        seed: Option<u64>,
    },
}

impl BaseSpec {
    /// Number of distinct generator labels.
    pub fn n_labels(&self) -> usize {
        match self {
            Self::Cyclic { n } => *n,
            Self::Permutation { permutation, .. } => permutation.len(),
            Self::Bernoulli { probabilities, .. } => probabilities.len(),
            Self::Markov { transition, .. } => transition.len(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Cyclic { .. } | Self::Permutation { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CocycleSpec {
    /// One row-major matrix per label.
    Matrices { matrices: Vec<Vec<Vec<f64>>> },
    /// The same matrix at every label.
    Constant { matrix: Vec<Vec<f64>> },
    Diagonal { values: Vec<f64> },
    Rotation { theta: f64 },
    Identity { dim: usize },
    /// Gaussian generators, optionally rescaled to `|det| = 1`.
    Random {
        dim: usize,
        #[serde(default)]
        unimodular: bool,
        #[serde(default = "default_max_condition")]
        max_condition: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
}

fn default_max_condition() -> f64 {
    1e3
}

impl CocycleSpec {
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Matrices { matrices } => matrices.first().map(|m| m.len()),
            Self::Constant { matrix } => Some(matrix.len()),
            Self::Diagonal { values } => Some(values.len()),
            Self::Rotation { .. } => Some(2),
            Self::Identity { dim } | Self::Random { dim, .. } => Some(*dim),
        }
    }

    fn is_random(&self) -> bool {
        matches!(self, Self::Random { .. })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Optional; when present it must agree with the CLI verb.
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub p: Option<PValue>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    /// Cap on the scan for `N`, and length of `lambda` sequences.
    #[serde(default)]
    pub n_max: Option<usize>,
    /// QR steps (after an equal transient) on sampled bases.
    #[serde(default)]
    pub steps: Option<usize>,
    /// Orbit starts for Monte Carlo estimates on sampled bases.
    #[serde(default)]
    pub samples: Option<usize>,
    pub base: BaseSpec,
    pub cocycle: CocycleSpec,
    /// Second cocycle for `rho` and `proof-check`.
    #[serde(default)]
    pub other: Option<CocycleSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// A validation finding: the offending field and the violated constraint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

pub const DEFAULT_TRIALS: u64 = 100;
pub const DEFAULT_N_MAX: usize = 10_000;
pub const DEFAULT_STEPS: usize = 20_000;
pub const DEFAULT_SAMPLES: usize = 16;

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, Diagnostic> {
        toml::from_str(text).map_err(|e| Diagnostic::new("config", e.message().to_string()))
    }

    pub fn trials(&self) -> u64 {
        self.trials.unwrap_or(DEFAULT_TRIALS)
    }

    pub fn n_max(&self) -> usize {
        self.n_max.unwrap_or(DEFAULT_N_MAX)
    }

    pub fn steps(&self) -> usize {
        self.steps.unwrap_or(DEFAULT_STEPS)
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    pub fn k_or(&self, default: usize) -> usize {
        self.k.unwrap_or(default)
    }

    pub fn p_exponent(&self) -> LpExponent {
        self.p.as_ref().and_then(|p| p.to_exponent().ok()).unwrap_or(LpExponent::ONE)
    }

    /// The effective experiment, given the verb it is run under.
    pub fn kind_for(&self, verb: ExperimentKind) -> ExperimentKind {
        self.experiment.unwrap_or(verb)
    }

    /// Whether the run consumes randomness anywhere.
    pub fn is_randomized(&self, kind: ExperimentKind) -> bool {
        kind.samples_perturbations()
            || !self.base.is_finite()
            || self.cocycle.is_random()
            || self.other.as_ref().is_some_and(CocycleSpec::is_random)
    }

    /// All findings; empty iff the config can run as `verb`.
    pub fn validate(&self, verb: ExperimentKind) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            out.push(Diagnostic::new(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if let Some(kind) = self.experiment {
            if kind != verb {
                out.push(Diagnostic::new("experiment", format!("config is for `{kind}` but was run as `{verb}`")));
            }
        }
        validate_base(&self.base, &mut out);
        let d = validate_cocycle("cocycle", &self.cocycle, &self.base, &mut out);
        if let Some(other) = &self.other {
            let d2 = validate_cocycle("other", other, &self.base, &mut out);
            if let (Some(a), Some(b)) = (d, d2) {
                if a != b {
                    out.push(Diagnostic::new("other", format!("dimension {b} differs from cocycle dimension {a}")));
                }
            }
        }
        if let (Some(k), Some(d)) = (self.k, d) {
            if k == 0 || k > d {
                out.push(Diagnostic::new("k", format!("k = {k} must lie in 1..={d}")));
            }
        }
        if let Some(p) = &self.p {
            if let Err(msg) = p.to_exponent() {
                out.push(Diagnostic::new("p", format!("{msg}; p >= 1 or \"inf\" required")));
            }
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps.is_finite()) {
                out.push(Diagnostic::new("epsilon", format!("epsilon = {eps} must be positive and finite")));
            }
        }
        if let Some(radii) = &self.radii {
            if radii.is_empty() {
                out.push(Diagnostic::new("radii", "at least one radius is required"));
            }
            for (i, &r) in radii.iter().enumerate() {
                if !(r > 0.0 && r <= 1.0) {
                    out.push(Diagnostic::new(format!("radii[{i}]"), format!("radius {r} must lie in (0, 1]")));
                } else if i > 0 && !(r < radii[i - 1]) {
                    out.push(Diagnostic::new(format!("radii[{i}]"), "radii must be strictly descending"));
                }
            }
        }
        for (field, value) in [("n_max", self.n_max), ("steps", self.steps), ("samples", self.samples)] {
            if value == Some(0) {
                out.push(Diagnostic::new(field, "must be positive"));
            }
        }
        if self.trials == Some(0) {
            out.push(Diagnostic::new("trials", "must be positive"));
        }

        let kind = self.kind_for(verb);
        if kind.needs_finite_base() && !self.base.is_finite() {
            out.push(Diagnostic::new("base.kind", format!("`{kind}` needs a cyclic or permutation base")));
        }
        if self.seed.is_none() && (kind.samples_perturbations() || !self.has_local_seeds()) && self.is_randomized(kind) {
            out.push(Diagnostic::new("seed", format!("`{kind}` is randomized and needs a seed")));
        }
        let require = |field: &str, present: bool, out: &mut Vec<Diagnostic>| {
            if !present {
                out.push(Diagnostic::new(field, format!("required by `{kind}`")));
            }
        };
        match kind {
            ExperimentKind::Rho => require("other", self.other.is_some(), &mut out),
            ExperimentKind::Certificate | ExperimentKind::Sweep | ExperimentKind::ProofCheck => {
                require("epsilon", self.epsilon.is_some(), &mut out)
            }
            ExperimentKind::Collapse | ExperimentKind::Profile => require("radii", self.radii.is_some(), &mut out),
            ExperimentKind::Spectrum | ExperimentKind::LambdaSeq => {}
        }
        out
    }

    /// Whether every randomized base or cocycle carries its own seed.
    fn has_local_seeds(&self) -> bool {
        let base_ok = match &self.base {
            BaseSpec::Bernoulli { seed, .. } | BaseSpec::Markov { seed, .. } => seed.is_some(),
            _ => true,
        };
        let coc_ok = |c: &CocycleSpec| match c {
            CocycleSpec::Random { seed, .. } => seed.is_some(),
            _ => true,
        };
        base_ok && coc_ok(&self.cocycle) && self.other.as_ref().map_or(true, coc_ok)
    }
}

fn validate_base(base: &BaseSpec, out: &mut Vec<Diagnostic>) {
    let probability_row = |field: String, row: &[f64], out: &mut Vec<Diagnostic>| {
        if row.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            out.push(Diagnostic::new(field.clone(), "entries must be finite and non-negative"));
        }
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            out.push(Diagnostic::new(field, format!("entries sum to {total}, not 1")));
        }
    };
    match base {
        BaseSpec::Cyclic { n } => {
            if *n == 0 {
                out.push(Diagnostic::new("base.n", "must be positive"));
            }
        }
        BaseSpec::Permutation { permutation, weights } => {
            let n = permutation.len();
            if n == 0 {
                out.push(Diagnostic::new("base.permutation", "must list at least one atom"));
            }
            let mut seen = vec![false; n];
            for (i, &j) in permutation.iter().enumerate() {
                if j >= n || std::mem::replace(&mut seen[j], true) {
                    out.push(Diagnostic::new(
                        "base.permutation",
                        format!("entry {i} (= {j}) breaks the bijection on 0..{n}"),
                    ));
                    break;
                }
            }
            if let Some(w) = weights {
                if w.len() != n {
                    out.push(Diagnostic::new("base.weights", format!("{} weights for {n} atoms", w.len())));
                } else {
                    probability_row("base.weights".into(), w, out);
                    if seen.iter().all(|s| *s) && permutation.iter().enumerate().any(|(i, &j)| (w[j] - w[i]).abs() > WEIGHT_TOL) {
                        out.push(Diagnostic::new("base.weights", "weights must be constant along cycles"));
                    }
                }
            }
        }
        BaseSpec::Bernoulli { probabilities, .. } => {
            if probabilities.is_empty() {
                out.push(Diagnostic::new("base.probabilities", "must list at least one symbol"));
            }
            probability_row("base.probabilities".into(), probabilities, out);
        }
        BaseSpec::Markov { transition, .. } => {
            let n = transition.len();
            if n == 0 {
                out.push(Diagnostic::new("base.transition", "must have at least one row"));
            }
            for (i, row) in transition.iter().enumerate() {
                if row.len() != n {
                    out.push(Diagnostic::new(format!("base.transition[{i}]"), format!("row has {} entries, expected {n}", row.len())));
                } else {
                    probability_row(format!("base.transition[{i}]"), row, out);
                }
            }
        }
    }
}

fn check_matrix(field: &str, rows: &[Vec<f64>], out: &mut Vec<Diagnostic>) -> Option<Matrix> {
    match Matrix::from_rows(rows) {
        Ok(m) if !m.is_finite() => out.push(Diagnostic::new(field, "entries must be finite")),
        Ok(m) if !(m.determinant().abs() >= DEGENERATE_DET) => {
            out.push(Diagnostic::new(field, "matrix is singular"))
        }
        Ok(m) => return Some(m),
        Err(e) => out.push(Diagnostic::new(field, e.to_string())),
    }
    None
}

fn validate_cocycle(field: &str, spec: &CocycleSpec, base: &BaseSpec, out: &mut Vec<Diagnostic>) -> Option<usize> {
    let d = spec.dim();
    match spec {
        CocycleSpec::Matrices { matrices } => {
            if matrices.len() != base.n_labels() {
                out.push(Diagnostic::new(
                    format!("{field}.matrices"),
                    format!("{} matrices for {} base labels", matrices.len(), base.n_labels()),
                ));
            }
            for (i, m) in matrices.iter().enumerate() {
                let name = format!("{field}.matrices[{i}]");
                if let Some(m) = check_matrix(&name, m, out) {
                    if Some(m.dim()) != d {
                        out.push(Diagnostic::new(name, "dimension differs from the first matrix"));
                    }
                }
            }
        }
        CocycleSpec::Constant { matrix } => {
            check_matrix(&format!("{field}.matrix"), matrix, out);
        }
        CocycleSpec::Diagonal { values } => {
            if values.is_empty() || values.iter().any(|v| !(v.is_finite() && *v != 0.0)) {
                out.push(Diagnostic::new(format!("{field}.values"), "need at least one finite non-zero entry"));
            }
        }
        CocycleSpec::Rotation { theta } => {
            if !theta.is_finite() {
                out.push(Diagnostic::new(format!("{field}.theta"), "must be finite"));
            }
        }
        CocycleSpec::Identity { dim } | CocycleSpec::Random { dim, .. } => {
            if *dim == 0 {
                out.push(Diagnostic::new(format!("{field}.dim"), "must be positive"));
            }
            if let CocycleSpec::Random { max_condition, .. } = spec {
                if !(*max_condition > 1.0) {
                    out.push(Diagnostic::new(format!("{field}.max_condition"), "must exceed 1"));
                }
            }
        }
    }
    d.filter(|&d| d > 0)
}

/// A cocycle over whichever base the config describes.
#[derive(Clone, Debug)]
pub enum BuiltCocycle {
    Finite(Cocycle<FiniteCyclicBase>),
    Sampled(Cocycle<SampledBase>),
}

impl BuiltCocycle {
    pub fn dim(&self) -> usize {
        match self {
            Self::Finite(a) => a.dim(),
            Self::Sampled(a) => a.dim(),
        }
    }
}

/// The base and both cocycles, materialized.
#[derive(Clone, Debug)]
pub struct BuiltSystem {
    pub cocycle: BuiltCocycle,
    pub other: Option<BuiltCocycle>,
}

/// Seed for a randomized component: its own, else the global one.
fn component_seed(local: Option<u64>, global: Option<u64>, salt: u64) -> u64 {
    local.unwrap_or_else(|| global.unwrap_or(0) ^ salt)
}

fn generators(spec: &CocycleSpec, n: usize, seed: u64) -> cocycle_core::Result<Vec<Matrix>> {
    match spec {
        CocycleSpec::Matrices { matrices } => matrices.iter().map(|m| Matrix::from_rows(m)).collect(),
        CocycleSpec::Constant { matrix } => Ok(vec![Matrix::from_rows(matrix)?; n]),
        CocycleSpec::Diagonal { values } => Ok(vec![Matrix::diagonal(values); n]),
        CocycleSpec::Rotation { theta } => Ok(vec![Matrix::rotation(*theta); n]),
        CocycleSpec::Identity { dim } => Ok(vec![Matrix::identity(*dim); n]),
        CocycleSpec::Random { dim, unimodular, max_condition, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| {
                    if *unimodular {
                        families::random_unimodular(&mut rng, *dim, *max_condition)
                    } else {
                        families::random_gl(&mut rng, *dim, *max_condition)
                    }
                })
                .collect()
        }
    }
}

const COCYCLE_SALT: u64 = 0x636f_6379_636c_6531;
const OTHER_SALT: u64 = 0x636f_6379_636c_6532;
const BASE_SALT: u64 = 0x6261_7365_0000_0001;

impl ExperimentConfig {
    /// Materializes the base and cocycles of an already validated config.
    pub fn build(&self) -> cocycle_core::Result<BuiltSystem> {
        let local = |c: &CocycleSpec| match c {
            CocycleSpec::Random { seed, .. } => *seed,
            _ => None,
        };
        let a_seed = component_seed(local(&self.cocycle), self.seed, COCYCLE_SALT);
        let b_seed = self.other.as_ref().map(|o| component_seed(local(o), self.seed, OTHER_SALT));
        let n = self.base.n_labels();
        match &self.base {
            BaseSpec::Cyclic { .. } | BaseSpec::Permutation { .. } => {
                let base = std::sync::Arc::new(match &self.base {
                    BaseSpec::Cyclic { n } => FiniteCyclicBase::cyclic(*n)?,
                    BaseSpec::Permutation { permutation, weights: Some(w) } => {
                        FiniteCyclicBase::new(w.clone(), permutation.clone())?
                    }
                    BaseSpec::Permutation { permutation, weights: None } => {
                        FiniteCyclicBase::uniform(permutation.clone())?
                    }
                    _ => unreachable!(),
                });
                let a = Cocycle::new(base.clone(), generators(&self.cocycle, n, a_seed)?)?;
                let other = match (&self.other, b_seed) {
                    (Some(o), Some(s)) => Some(BuiltCocycle::Finite(Cocycle::new(base, generators(o, n, s)?)?)),
                    _ => None,
                };
                Ok(BuiltSystem { cocycle: BuiltCocycle::Finite(a), other })
            }
            BaseSpec::Bernoulli { probabilities, seed } => {
                let base = SampledBase::bernoulli(probabilities.clone(), component_seed(*seed, self.seed, BASE_SALT))?;
                self.build_sampled(base, n, a_seed, b_seed)
            }
            BaseSpec::Markov { transition, seed } => {
                let base = SampledBase::markov(transition.clone(), component_seed(*seed, self.seed, BASE_SALT))?;
                self.build_sampled(base, n, a_seed, b_seed)
            }
        }
    }

    fn build_sampled(&self, base: SampledBase, n: usize, a_seed: u64, b_seed: Option<u64>) -> cocycle_core::Result<BuiltSystem> {
        let base = std::sync::Arc::new(base);
        let a = Cocycle::new(base.clone(), generators(&self.cocycle, n, a_seed)?)?;
        let other = match (&self.other, b_seed) {
            (Some(o), Some(s)) => Some(BuiltCocycle::Sampled(Cocycle::new(base, generators(o, n, s)?)?)),
            _ => None,
        };
        Ok(BuiltSystem { cocycle: BuiltCocycle::Sampled(a), other })
    }
}
