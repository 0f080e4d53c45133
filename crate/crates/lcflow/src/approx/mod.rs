//! The glued leading-order approximate solution, its director corrections
//! and PDE residual.

mod geometry;
mod glue;
mod residual;
mod solution;

pub use geometry::{Distance, Geometry};
pub use glue::{cutoff, cutoff_d1, cutoff_d2, glued_order, GlueConfig};
pub use residual::{
    operator_fd, residual, residual_at, ResidualReport, ResidualSweep, Sampling, MIN_NODES_PER_EPS,
};
pub use solution::{build_q0, h0_and_g0, ApproxSolution, Correction, DirectorField};
