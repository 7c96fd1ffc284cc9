//! Thermal density matrices sampled by density matrix quantum Monte Carlo,
//! then time-evolved element by element as pure states on a simulated
//! gate-based backend.
//!
//! The pipeline has two halves joined by the psip population file:
//!
//! 1. [`dmqmc`] samples `exp(-βH₀)` as a sparse signed population of psips.
//! 2. [`estimator`] hands every occupied site to the [`backend`], which
//!    prepares the matching pure state(s), Trotter-evolves them under `H₁`
//!    and measures the transverse magnetization.
//!
//! [`oracle`] holds the dense reference used to check both halves.

pub mod backend;
pub mod dmqmc;
pub mod estimator;
pub mod oracle;
pub mod parallel;
pub mod rng;
pub mod spin;

pub use parallel::Execution;
