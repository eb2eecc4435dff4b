#![no_std]
#![forbid(unsafe_code)]

//! Lyapunov spectra of linear cocycles over measure-preserving base systems.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It provides:
//! - dense small-matrix algebra with exterior (compound) powers ([`linalg`]),
//! - finite cyclic and sampled symbolic base systems ([`base`]),
//! - cocycles, their iterated products and inverses ([`cocycle`]),
//! - the `L^p` cocycle distances `tau_p` and `rho_p` ([`metrics`]),
//! - exact and estimated Lyapunov spectra and the integrated sums `Λ_k` ([`lyapunov`]),
//! - the constructive upper-semicontinuity machinery and perturbation
//!   experiments ([`lab`]).

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod base;
pub mod cocycle;
mod error;
pub mod families;
pub mod lab;
pub mod linalg;
pub mod lyapunov;
mod math;
pub mod metrics;

pub use base::{BaseSystem, FiniteCyclicBase, MonteCarloEstimate, SampledBase, SampledPoint, ShiftKind};
pub use cocycle::{Cocycle, IntegrabilityReport};

pub use error::{Error, Result};
pub use linalg::{CompoundMatrix, Matrix};
pub use lyapunov::{LambdaSequence, LyapunovSpectrum, SpectrumMethod};
pub use metrics::{LpExponent, MetricValue};


