use thiserror::Error;

use crate::fock::BasisTag;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("site {site} out of range for a lattice of {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("hopping between equal sites {0}; use number_op instead")]
    EqualSites(usize),

    #[error("Pauli violation: {particles} fermions of one spin on {sites} sites")]
    PauliViolation { particles: usize, sites: usize },

    #[error("basis dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: u128, cap: usize },

    #[error("operator basis mismatch: {left} vs {right}")]
    BasisMismatch { left: BasisTag, right: BasisTag },

    #[error("wrong particle species: {0}")]
    Species(String),

    #[error("geometry has {got} coefficients but the lattice has {expected} sites")]
    GeometryLength { expected: usize, got: usize },

    #[error("sites {0} and {1} are not nearest neighbours")]
    NotNearestNeighbor(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("zones overlap at site {0}")]
    OverlappingZones(usize),

    #[error("time grids do not match: {0}")]
    GridMismatch(String),

    #[error("integration step failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("jump channel `{label}` annihilated the state at t = {t}")]
    ZeroNormJump { label: String, t: f64 },

    #[error("eigensolver did not converge: residual {residual:e} after {iterations} restarts")]
    NoConvergence { residual: f64, iterations: usize },
}
