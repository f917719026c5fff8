//! Spectral Galerkin simulation and estimation for stochastic Burgers-type
//! equations with fractional dissipation, their lattice and smoothed variants,
//! and hyperviscous 2d Navier-Stokes.

pub mod drift;
pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod spectral;
pub mod statistics;

pub use error::{Error, Result};
