//! Numerical laboratory for the one-dimensional isentropic compressible
//! Navier-Stokes equations with degenerate viscosity `μ(ρ) = ρ^α`, built
//! around smoothed 2-rarefaction waves.

pub mod background;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod gas;
pub mod grid;
pub mod initdata;
pub mod quad;
pub mod rarefaction;
pub mod solver;

pub use error::{Error, Result};
pub use background::{Background, ConstantState};
pub use gas::{Family, GasParams};
pub use grid::Grid1D;
pub use rarefaction::{WavePoint, WaveProfile};
