use alloc::string::String;
use core::fmt;

/// Errors raised by the cocycle numerics.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Matrix or cocycle dimensions disagree.
    DimensionMismatch { expected: usize, found: usize },
    /// A matrix was built from ragged or empty rows.
    MalformedMatrix(String),
    /// A NaN or infinite value showed up where finite values are required.
    NonFinite(&'static str),
    /// A matrix that must be invertible has `|det|` below the degeneracy floor.
    Singular { det: f64 },
    /// Exterior degree outside `1..=dim`.
    DegreeOutOfRange { k: usize, dim: usize },
    /// A scalar argument violates the operation's domain.
    Domain { what: &'static str, value: f64 },
    /// Atom index outside the finite base.
    InvalidPoint { point: usize, n_atoms: usize },
    /// Base weights are not a probability vector.
    InvalidWeights(String),
    /// The base map is not a bijection on the atoms.
    InvalidPermutation(String),
    /// `weight[T(i)] != weight[i]`.
    NotMeasurePreserving { atom: usize },
    /// Transition or marginal probabilities are inconsistent.
    InvalidChain(String),
    /// An integrand evaluated to a non-finite value.
    NonFiniteIntegrand { at: usize },
    /// The operation is only defined for another kind of base or cocycle.
    Unsupported(&'static str),
    /// Two cocycles do not live over the same base.
    BaseMismatch,
    /// The base must be ergodic for this operation.
    NotErgodic,
    /// An iterated product left the floating-point range.
    ProductOverflow { steps: usize },
    /// Iterative linear algebra failed to converge.
    NoConvergence(&'static str),
    /// The scan for the proof's `N` hit its cap.
    ScanExhausted { best_n: usize, n_max: usize, best_excess: f64 },
    /// The certified radius underflowed to zero.
    DegenerateRadius { log_delta_prime: f64 },
    /// The perturbation sampler could not produce a point inside the ball.
    SamplerDegenerate { radius: f64 },
    /// A collapse perturbation within the budget does not exist at this base size.
    BudgetUnreachable { rho: f64, budget: f64, suggested_atoms: usize },
    /// The collapse construction did not reach one-point spectrum.
    CollapseFailed { gap: f64 },
    /// One of the inequalities the semicontinuity argument guarantees failed.
    ProofInequalityViolated { name: &'static str, measured: f64, bound: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Self::MalformedMatrix(msg) => write!(f, "malformed matrix: {msg}"),
            Self::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Self::Singular { det } => write!(f, "matrix is singular (det = {det:e})"),
            Self::DegreeOutOfRange { k, dim } => {
                write!(f, "exterior degree {k} outside 1..={dim}")
            }
            Self::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Self::InvalidPoint { point, n_atoms } => {
                write!(f, "point {point} is not an atom of a base with {n_atoms} atoms")
            }
            Self::InvalidWeights(msg) => write!(f, "invalid weights: {msg}"),
            Self::InvalidPermutation(msg) => write!(f, "invalid permutation: {msg}"),
            Self::NotMeasurePreserving { atom } => {
                write!(f, "map does not preserve the measure at atom {atom}")
            }
            Self::InvalidChain(msg) => write!(f, "invalid shift parameters: {msg}"),
            Self::NonFiniteIntegrand { at } => write!(f, "integrand not finite at {at}"),
            Self::Unsupported(what) => write!(f, "unsupported: {what}"),
            Self::BaseMismatch => f.write_str("cocycles live over different bases"),
            Self::NotErgodic => f.write_str("base system is not ergodic"),
            Self::ProductOverflow { steps } => {
                write!(f, "cocycle product overflowed after {steps} steps; use the log-scaled path")
            }
            Self::NoConvergence(what) => write!(f, "{what} did not converge"),
            Self::ScanExhausted { best_n, n_max, best_excess } => write!(
                f,
                "no N <= {n_max} satisfies the start conditions (best N = {best_n}, excess {best_excess:e})"
            ),
            Self::DegenerateRadius { log_delta_prime } => {
                write!(f, "certified radius underflows (log delta' = {log_delta_prime})")
            }
            Self::SamplerDegenerate { radius } => {
                write!(f, "sampler cannot reach the ball of radius {radius:e}")
            }
            Self::BudgetUnreachable { rho, budget, suggested_atoms } => write!(
                f,
                "cheapest collapse costs rho = {rho} > budget {budget}; needs about {suggested_atoms} atoms"
            ),
            Self::CollapseFailed { gap } => {
                write!(f, "collapse did not reach one-point spectrum (gap {gap:e})")
            }
            Self::ProofInequalityViolated { name, measured, bound } => {
                write!(f, "inequality {name} violated: {measured:e} > {bound:e}")
            }
        }
    }
}

impl core::error::Error for Error {}
