//! Numerical laboratory for sound-wave dynamics in a dilute Bose gas on a
//! periodic box.
//!
//! The crate is organized around a shared periodic grid ([`grid`]), smooth
//! compactly supported pair potentials ([`potential`]), the nonlinear
//! effective one-particle equations ([`meanfield`]), their momentum-space
//! linearization with the full dispersion/instability analysis
//! ([`bogolyubov`]), and an exact few-boson sector with the good/bad-particle
//! counting formalism ([`manybody`]).

pub mod bogolyubov;
pub mod error;
pub mod grid;
pub mod manybody;
pub mod meanfield;
pub mod potential;

pub use error::CoreError;
pub use grid::{dft_forward, dft_inverse, ComplexField, SpectralField, TorusGrid};
pub use potential::PairPotential;

/// Convenient alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CoreError>;
