//! Periodic gradient-flow simulation of the Q-tensor field and field
//! diagnostics.

mod fft;
mod grid;
mod interface;
mod io;
mod ops;
mod sim;

pub use fft::Spectral;
pub use grid::{PeriodicGrid, QField, Q_BOUND};
pub use interface::{interface_locate, Interface, Probe, MIDPOINT};
pub use io::{read_snapshot, write_snapshot, TimeSeries, SNAPSHOT_VERSION};
pub use ops::{
    divcurl_check, elastic_apply, elastic_apply_fd4, energy, energy_parts, error_energy, gradient,
    random_band_limited, t_operator, DivCurlReport, EnergyParts,
};
pub use sim::{stability_bound, Scheme, SimConfig, Simulation};
