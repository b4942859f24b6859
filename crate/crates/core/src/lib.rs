//! Numerical laboratory for the equivariant Adkins-Nappi wave map equation.
//!
//! The crate is organised around a uniform radial mesh ([`grid`]), the
//! closed-form nonlinearities and conserved functionals ([`model`]), the
//! method-of-lines time integrator and its reference solutions ([`evolve`]),
//! the stationary one-parameter family ([`stationary`]) and the exterior
//! energy diagnostics ([`channels`]). File formats shared by the command line
//! front end live in [`io`].

pub mod channels;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod io;
pub mod model;
pub mod stationary;

pub use error::{Error, Result};
pub use grid::{Parity, RadialGrid};
pub use model::{EnergyReport, FieldState, Formulation};

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
