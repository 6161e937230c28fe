use rayon::prelude::*;

use super::engine::{run_trajectory, EngineConfig, Sampler, TrajectoryOutcome};
use crate::error::{Error, Result};
use crate::fock::SparseOperator;
use crate::probe::JumpChannel;
use crate::C64;

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "BACKACTION_WORKERS";

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidParameter(format!("{WORKERS_ENV} must be a positive integer, got '{v}'"))),
        },
    }
}

/// Runs `n_traj` independent trajectories in parallel.
///
/// Trajectory `k` draws from stream `k` of the configured seed, so results
/// do not depend on the number of workers. Samplers come from `make` and
/// are returned alongside each outcome, in trajectory order.
pub fn run_ensemble<S, F>(
    n_traj: usize,
    psi0: &[C64],
    h_eff: &SparseOperator,
    channels: &[JumpChannel],
    cfg: &EngineConfig,
    workers: Option<usize>,
    make: F,
) -> Result<Vec<(TrajectoryOutcome, S)>>
where
    S: Sampler + Send,
    F: Fn(usize) -> S + Sync,
{
    let job = || {
        (0..n_traj)
            .into_par_iter()
            .map(|k| {
                let mut s = make(k);
                let out = run_trajectory(psi0, h_eff, channels, cfg, k as u64, &mut s)?;
                Ok((out, s))
            })
            .collect::<Result<Vec<_>>>()
    };
    match workers {
        None => job(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(job),
    }
}
