//! Quantities shown in the figures: mode populations, number
//! distributions, variances of measured operators, correlations between
//! zones and entanglement entropy.
//!
//! Entropies are in nats.

mod partition;
mod set;
mod state;

pub use partition::ModePartition;
pub use set::{
    aggregate, column_stats, late_window_mean, steady_variance, traj_avg_variance, ColumnStats, ObservableSet,
    Recorder, RunRecord,
};
pub use state::{
    entanglement_entropy, expectation, imbalance, mode_number_distribution, number_correlations, reduced_entropy,
    site_densities, variance, zone_counts,
};
