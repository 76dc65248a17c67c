//! Sparse Newton interpolation on lower sets of R-Leja tensor grids.

mod adapt;
mod index;
mod leja;
mod surrogate;

pub use adapt::{adapt, build_from_set, AdaptOptions, AdaptReport, ScoreNorm};
pub use index::{iso_set, neighbors, LowerSet, MultiIndex};
pub use leja::{lebesgue_estimate, rleja_nodes, univariate_h, NodeTable};
pub use surrogate::Surrogate;
