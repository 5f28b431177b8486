//! Stationary state of two square-lattice free-fermion reservoirs joined by a
//! finite tunneling junction.
//!
//! * [`green`] — lattice Green's function, shell density, asymptotics.
//! * [`scattering`] — the junction, its Q-matrices and bound states.
//! * [`observables`] — densities, bond currents, Landauer current.
//! * [`quad`] — adaptive quadrature used throughout.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod green;
pub mod lattice;
pub mod quad;
pub mod reservoir;
pub mod observables;
pub mod scattering;

pub use error::{Error, Result};
pub use lattice::{Disp, Site};
