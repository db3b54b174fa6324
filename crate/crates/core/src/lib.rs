//! Entanglement purification with noisy local operations.
//!
//! The crate simulates the two-way recurrence protocol (bilateral rotation,
//! bilateral CNOT, coincidence measurement) on Bell-diagonal ensembles whose
//! pairs carry the classical error flags of a "lab demon". It provides
//!
//! - [`bell_algebra`]: exact Bell-label maps and the dense twirl,
//! - [`noise_model`]: two-sided Pauli channels,
//! - [`lab_demon`]: error flags and the flag update table,
//! - [`recurrence`]: the exact 16-coefficient round map, iteration, regimes,
//!   thresholds and convergence exponents,
//! - [`monte_carlo`]: finite ensembles with sampled noise,
//! - [`dense_oracle`]: brute-force density-matrix reference,
//! - [`verify`], [`config`], [`export`], [`cli`]: conformance checks and run plumbing.

// Negated float comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bell_algebra;
pub mod cli;
pub mod config;
pub mod dense_oracle;
pub mod error;
pub mod export;
pub mod lab_demon;
pub mod linalg;
pub mod monte_carlo;
pub mod noise_model;
pub mod recurrence;
pub mod verify;

pub use bell_algebra::{BellLabel, Pauli, Shift};
pub use error::{Error, Result};
pub use lab_demon::{ErrorFlag, FlagMode};
pub use noise_model::{NoiseFamily, NoiseModel, NoiseSpec, Placement};
pub use recurrence::{iterate, one_round, Regime, StopRule, SubensembleState, Trajectory};
