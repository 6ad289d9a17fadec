//! Concentration of informational non-equilibrium for finite-dimensional
//! quantum states.
//!
//! The crate measures how far a state is from the maximally mixed one in
//! max-relative-entropy terms, finds global unitaries on a state plus an
//! ancilla copy that concentrate that distance onto one subsystem, and
//! verifies the analytic optima against independent brute-force oracles.
//!
//! Module map:
//!
//! * [`linalg`]: dense complex matrices, cyclic Jacobi eigensolver,
//!   Kronecker products and partial traces.
//! * [`states`]: validated density matrices, bipartite states, the state
//!   families used throughout, JSON state files.
//! * [`concentration`]: the non-equilibrium measure, Ky Fan sums, optimal
//!   and explicit concentration unitaries, evolution reports.
//! * [`correlations`]: entropies, mutual information of concentrated
//!   outputs, anomalous-relaxation comparisons, activation via
//!   correlations.
//! * [`randomness`]: best guessing probability under projective
//!   measurements and the two-level unitary that improves it.
//! * [`oracle`]: seeded random generators and brute-force verifiers that
//!   are deliberately independent of the analytic code paths.
//! * [`verify`]: named self-check suites that the CLI exposes.

pub mod concentration;
pub mod correlations;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod randomness;
pub mod states;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
