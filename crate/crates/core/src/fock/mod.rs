//! Fixed-number occupation bases and the sparse second-quantized operators
//! built on them.
//!
//! Only number-conserving bilinears are ever materialized, so every
//! operator lives inside one particle-number sector. Bosonic occupations
//! are truncated at the total particle number, which is exact.

mod basis;
mod ops;
mod sparse;

pub use basis::{
    sector_dimension, BasisTag, FockBasis, Particles, Species, Spin, MASTER_DIMENSION_CAP,
    TRAJECTORY_DIMENSION_CAP,
};
pub use ops::{hop_op, number_op, total_number_op, weighted_density, weighted_magnetization};
pub use sparse::SparseOperator;
