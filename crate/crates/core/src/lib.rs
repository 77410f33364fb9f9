//! Spatial filtering for two-condition signal classification.
//!
//! The classical common spatial patterns filter pits the average
//! covariance matrices of two signal conditions against each other in a
//! generalized eigenproblem. Its robust variant replaces each average by a
//! data-driven ellipsoid of candidate covariance matrices and optimizes
//! the worst case over both ellipsoids, which turns the eigenproblem into
//! a nonlinear Rayleigh quotient whose matrices depend on the filter
//! itself. This crate provides the whole chain:
//!
//! * [`covariance`] — trial preprocessing, covariance ensembles, and the
//!   principal-component tolerance models that span the ellipsoids;
//! * [`kernel`] — the worst-case covariances, the quotient, and their
//!   gradients and second-order matrices;
//! * [`solvers`] — the classical filter, a fixed-point baseline, the
//!   self-consistent field iteration with line search whose target
//!   eigenvalue is the smallest positive one, a closed-form variant for
//!   Frobenius-ball tolerance sets, and an independent solution verifier;
//! * [`classify`] — log-variance features, Fisher discriminant, balanced
//!   classification rate;
//! * [`synth`] — seeded synthetic trial generation for experiments;
//! * [`eig`] — the dense symmetric eigensolvers underneath.

pub mod classify;
pub mod covariance;
pub mod eig;
pub mod error;
pub mod kernel;
pub mod solvers;
pub mod synth;

pub use classify::{FeatureVector, LdaClassifier};
pub use covariance::{Condition, CovarianceEnsemble, Orientation, ToleranceModel, TrialSet};
pub use eig::{EigenPairs, SymmetricMatrix};
pub use error::{Error, Result};
pub use kernel::{KernelEval, KernelPair};
pub use solvers::{
    SolveSettings, SolveStatus, SolveTrace, SpatialFilter, VerificationReport,
};
pub use synth::SynthSpec;
