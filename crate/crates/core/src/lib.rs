//! Numerical models for quantum-circuit refrigeration.
//!
//! The crate is `no_std` (with `alloc`) and contains only pure numerics:
//!
//! - [`junction`]: Dynes density of states, Fermi statistics and the
//!   normalized forward tunneling rate of an NIS junction.
//! - [`spectrum`]: photon-assisted transition rates, damping, effective
//!   temperature and the multiphoton (rf-driven) coupling strength.
//! - [`lamb`]: principal-value quadrature and the broadband Lamb shift.
//! - [`dynamics`]: Fock-ladder rate equations, pulse protocols and reset.
//! - [`ep`]: two-mode non-Hermitian Hamiltonian and exceptional points.
//! - [`source_calib`]: incoherent photon source and amplifier-chain calibration.
//! - [`thermal`]: quantum-limited photonic heat conduction between islands.
//!
//! File formats, sweeps and the command line live in the `qcrlab` crate.

#![no_std]

extern crate alloc;

pub mod constants;
pub mod dynamics;
pub mod ep;
mod error;
pub mod interp;
pub mod junction;
pub mod lamb;
pub mod linalg;
pub mod lm;
pub mod ode;
pub mod quad;
pub mod roots;
pub mod source_calib;
pub mod spectrum;
pub mod thermal;

pub use error::{Error, Result};
