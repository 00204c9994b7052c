//! Exact many-body and mean-field tools for bosons on a ring.
//!
//! The crate covers the whole chain from the momentum-resolved Fock basis to
//! measurement-like position samples:
//!
//! * [`basis`] enumerates Fock states at fixed particle number and total momentum.
//! * [`hamiltonian`] applies the contact-interaction Hamiltonian and extracts
//!   yrast states by shifted power iteration (or Lanczos).
//! * [`wavefunction`] evaluates position-space amplitudes and conditional
//!   single-particle wave functions.
//! * [`sampling`] draws N-body configurations, aligns them and histograms them.
//! * [`bohmian`] integrates Bohmian trajectories of the free gas.
//! * [`meanfield`] builds dark and gray soliton profiles of the Gross-Pitaevskii equation.
//!
//! Units follow ħ = m = 1. Total momentum is an integer in units of 2π/L.

pub mod basis;
pub mod bohmian;
mod error;
pub mod hamiltonian;
pub mod meanfield;
pub mod sampling;
pub mod seed;
pub mod stats;
pub mod wavefunction;

pub use error::{Error, Result};

pub use num_complex::Complex64;
