//! Density-matrix simulation of small closed quantum systems under energy
//! decoherence, `ρ̇ = −i[Ĥ,ρ] − (τ/2)[Ĥ,[Ĥ,ρ]]`.
//!
//! Three systems are supported: a truncated harmonic oscillator, an
//! oscillator exchanging quanta with two spins, and two position-coupled
//! oscillators. [`evolution`] propagates states exactly in the energy
//! eigenbasis; [`experiments`] packages the standard scenarios as CSV tables.

pub mod error;
pub mod evolution;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod states;

pub use error::{Error, Result};
