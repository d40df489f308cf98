//! Tamed Euler integration of the Galerkin-truncated stochastic system.

mod engine;
mod noise;

pub use engine::{
    couple, couple_replica, drift, random_initial, simulate, simulate_batch, simulate_replica, tamed_step,
    CoupledRecord, Scheme, SimConfig, TrajectoryRecord,
};
pub(crate) use engine::{draw_increments, run_coupled};
pub use noise::NoiseSpec;
