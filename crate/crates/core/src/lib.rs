//! Numerical laboratory for the one-dimensional gravity-capillary water-wave
//! system in Zakharov form.
//!
//! Layers, bottom up:
//! - [`numerics`]: periodic grids, spectral multipliers, norms, potential carriers, I/O.
//! - [`dn`]: the Dirichlet-Neumann operator on a flattened strip.
//! - [`solitary`]: solitary-wave seeds, Newton refinement, speed derivatives.
//! - [`evolution`]: RK4 time stepping of the nonlinear system.
//! - [`stability`]: dense linearized operators, spectra, coercivity, linear growth.
//! - [`multi`]: two-soliton superposition, interaction residual, Duhamel correction.

pub mod dn;
pub mod error;
pub mod evolution;
pub mod fit;
pub mod multi;
pub mod numerics;
pub mod par;
pub mod solitary;
pub mod stability;

pub use error::{Result, WwError};
