//! Config files, artifact directories and the commands behind the binary.
//!
//! A simulate directory holds `config.toml`, `manifest.json`,
//! `aggregate.csv`, `stderr.csv`, `jumps.csv` and, unless disabled,
//! `trajectories/traj_NNNNN.csv`. A master directory holds `config.toml`,
//! `manifest.json` and `master.csv`. Every observable CSV has the header
//! `time,traj_id,<columns>`. When the basis fits the master cap both kinds
//! also store the final density matrix in `rho_final.csv`.

mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;

pub use artifacts::{read_rho, read_series, write_jumps, write_rho, write_series, Manifest, SCHEMA_VERSION};
pub use commands::{analyze, compare, master, simulate, CompareReport, ColumnReport, Tolerance};
pub use config::{
    ChannelName, EngineSection, GeometryName, InitSection, ModeName, ModelSection, Number, ObservablesSection,
    OutputSection, PairSpec, PartitionSpec, Prepared, ProbeSection, RunConfig, Source, SpeciesName, ZoneSpec,
};

use crate::error::Error;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] Error),

    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),

    #[error("{0}")]
    Artifact(String),
}

impl RunError {
    /// 2 for bad input, 3 for a refused dimension, 4 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Core(Error::DimensionCap { .. }) => 3,
            RunError::Core(
                Error::StepFailure { .. }
                | Error::ZeroNormJump { .. }
                | Error::NoConvergence { .. }
                | Error::NotNormalized(_),
            ) => 4,
            _ => 2,
        }
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Artifact(e.to_string())
    }
}
