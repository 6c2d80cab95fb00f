//! Pseudo-spectral solver for the 3D incompressible inhomogeneous
//! viscoelastic system on a periodic box, with time-weighted energy
//! diagnostics and numerical checks of the effective-tensor reformulation.
//!
//! [`harness::simulate`] runs a seeded small-data simulation end to end; the
//! other modules expose the pieces (transforms, right-hand sides, pressure,
//! stepper, energies, identities) for direct use.

// Index loops mirror the tensor notation; `!(x > 0.0)` is how NaN gets rejected.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod harness;
pub mod identities;
pub mod integrator;
pub mod model;
pub mod pressure;
pub mod spectral;

pub use error::{Error, Result};
