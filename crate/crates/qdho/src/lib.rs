//! Deterministic engine for a damped harmonic oscillator coupled to a
//! bosonic reservoir and the electromagnetic vacuum.
//!
//! The crate computes the memory kernel of the oscillator's Langevin
//! equation, expectation-value trajectories (Markovian, non-Markovian, and
//! with radiation reaction), the full table of first-order transition rates
//! between oscillator levels for vacuum/Fock/thermal bath states, the
//! vacuum↔reservoir exchange rates, and an independent exact-diagonalization
//! cross-check on discretized baths.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod exchange;
pub mod kernel;
pub mod model;
pub mod oracle;
pub mod rates;

pub use error::{Error, Result};
pub use model::PhysicalConfig;
