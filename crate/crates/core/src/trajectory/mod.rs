//! Quantum-jump trajectories and the master equation they unravel.

mod engine;
mod ensemble;
mod integrator;
mod lindblad;

pub use engine::{
    run_trajectory, trajectory_rng, Discard, EngineConfig, JumpEvent, JumpMode, Sampler, StepStats,
    TrajectoryOutcome,
};
pub use ensemble::{run_ensemble, workers_from_env, WORKERS_ENV};
pub use integrator::{evolve_nonhermitian, Derivative, Dp54, Schrodinger, Tolerances};
pub use lindblad::{lindblad_evolve, lindblad_series, pure_state, trace_distance, MasterConfig};
