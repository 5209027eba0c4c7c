//! Quantumness measures for two-qubit states.
//!
//! `qrough` computes the Wootters concurrence, linear entropies and the
//! phase-space Roughness of the reduced single-qubit states of a two-qubit
//! density matrix, and checks the exact complementarity relation that ties
//! them to the local excitation number and the ground-state
//! auto-correlation `f_C`.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: a small dense complex kernel for 2×2 and 4×4 matrices
//!   (Kronecker products, Jacobi eigensolver, PSD square roots, partial traces).
//! - [`states`]: validated single- and two-qubit states, Bell states and
//!   seeded random ensembles (Haar pure states, Ginibre states of fixed rank).
//! - [`measures`]: concurrence, linear entropy, squared Roughness and both
//!   sides of the mixed- and pure-state relations.
//! - [`appendix`]: an exact-rational reconstruction of the Roughness
//!   quadratic form from Wigner/Husimi overlap integrals.
//! - [`phasespace`]: a grid-integration oracle for Roughness straight from
//!   the Wigner and Husimi functions.
//! - [`campaign`]: deterministic Monte Carlo sampling campaigns, 2-D
//!   histograms on the `(C², R₊²)` plane and summary statistics.

#![forbid(unsafe_code)]

pub mod appendix;
pub mod campaign;
mod error;
pub mod fmt;
pub mod linalg;
pub mod measures;
pub mod phasespace;
pub mod rng;
pub mod states;

pub use error::{Error, Result};

pub use appendix::{build_lambda, LambdaMatrix, OverlapKind, OverlapTable};
pub use campaign::{run_campaign, CampaignConfig, Ensemble, Histogram2D, SampleRecord, SummaryStats};
pub use linalg::{ComplexMatrix, HermitianEigenSystem, Subsystem};
pub use measures::MeasureTuple;
pub use phasespace::PhaseSpaceGrid;
pub use states::{BellKind, DensityState, SingleQubitState, TwoQubitState, VVector};

pub use num_complex::Complex64;
