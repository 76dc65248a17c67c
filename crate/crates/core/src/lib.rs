//! Bayesian reconstruction of electrical conductivity from electrode voltages.
//!
//! The forward problem is the smoothened complete electrode model on the unit
//! square, discretized with P1 finite elements ([`forward`]). Conductivities
//! are parametrized by uniformly distributed coefficients ([`prior`]). The
//! parameter-to-voltage map is replaced by an adaptively built sparse Newton
//! interpolant on R-Leja nodes ([`interp`]), which is then sampled with
//! Metropolis-Hastings ([`mcmc`]). [`pipeline`] wires the stages together
//! behind a flat configuration file.

pub mod error;
pub mod forward;
pub mod interp;
pub mod linalg;
pub mod mcmc;
pub mod mesh;
pub mod pipeline;
pub mod prior;

pub use error::{Error, Result};
