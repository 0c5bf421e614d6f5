//! Spectral laboratory for a nonisothermal viscous Cahn-Hilliard system with
//! inertia and Cattaneo-Maxwell heat conduction on the unit box with
//! homogeneous Neumann conditions.

pub mod commands;
pub mod config;
pub mod decomposition;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod fit;
pub mod functionals;
pub mod model;
pub mod spectral;
pub mod verify;

pub use error::{ChicError, Result};
