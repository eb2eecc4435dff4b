//! The constructive side of upper semicontinuity: certified radii,
//! perturbation sampling, collapse witnesses, continuity profiles and a
//! step-by-step replay of the semicontinuity argument.

mod certificate;
mod collapse;
mod integrability;
mod profile;
mod proof;
mod sampler;
mod verify;

pub use certificate::{
    semicontinuity_modulus, semicontinuity_modulus_with, CertificateCase, CertificateOptions, SemicontinuityCertificate,
};
pub use collapse::{
    cheapest_collapse, collapse_candidates, collapse_perturbation, collapse_rotation, collapse_witness, constant_collapse,
    CollapseWitness, ONE_POINT_TOL,
};
pub use integrability::{uniform_integrability_k, uniform_integrability_weighted, UniformBound};
pub use profile::{check_radii, continuity_profile, epsilon_for_radius, profile_seed_row, profile_trial, ProfileRow};
pub use proof::{proof_internals_check, InequalityCheck, ProofDiagnostics};
pub use sampler::{BallSample, BallSampler, PerturbationFamily, PreparedSampler, MAX_HALVINGS};
pub use verify::{perturbation_report, verify_semicontinuity, verify_trial, PerturbationReport, VerificationSummary};
