//! Grids, spectral multipliers, norms and potential carriers.

pub mod carrier;
pub mod cheb;
pub mod grid;
pub mod io;
pub mod norms;
pub mod random;
pub mod state;

pub use carrier::{CarrierKind, RampCarrier};
pub use grid::{make_grid, Grid1D};
pub use norms::{es_norm, h1_norm, pm_norm, x0_norm, DerivativeSnapshot, NormReport};
pub use state::{reconstruct_phi, SurfaceState};
