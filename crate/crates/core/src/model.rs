//! Hubbard Hamiltonians and the non-Hermitian effective Hamiltonian of the
//! no-photon evolution.
//!
//! Units: hbar = 1, energies and rates in the same (inverse-time) unit as
//! the tunneling `J`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{hop_op, FockBasis, SparseOperator, Species, Spin};
use crate::linalg;
use crate::probe::JumpChannel;
use crate::C64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// One-dimensional chain with tunneling `J` and on-site interaction `U`.
///
/// `U` is signed and enters each Hamiltonian with that Hamiltonian's own
/// sign convention: the Bose-Hubbard term is `+U/2 n(n-1)` (repulsive for
/// `U > 0`) while the Fermi-Hubbard term is `-U n_up n_down` (attractive
/// for `U > 0`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub sites: usize,
    #[serde(default)]
    pub boundary: Boundary,
    pub tunneling: f64,
    pub interaction: f64,
}

impl LatticeSpec {
    pub fn new(sites: usize, tunneling: f64, interaction: f64) -> Result<Self> {
        Self { sites, boundary: Boundary::Open, tunneling, interaction }.validated()
    }

    pub fn periodic(self) -> Self {
        Self { boundary: Boundary::Periodic, ..self }
    }

    pub fn validated(self) -> Result<Self> {
        if self.sites < 2 {
            return Err(Error::InvalidParameter(format!("a chain needs L >= 2, got {}", self.sites)));
        }
        if !(self.tunneling >= 0.0) {
            return Err(Error::InvalidParameter(format!("J must be >= 0, got {}", self.tunneling)));
        }
        if !self.interaction.is_finite() {
            return Err(Error::InvalidParameter("U must be finite".into()));
        }
        Ok(self)
    }

    /// Nearest-neighbour bonds `(i, i+1)`, plus `(L-1, 0)` when periodic
    /// and `L > 2` (for `L = 2` the wrap bond coincides with the open one).
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut b: Vec<_> = (0..self.sites - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && self.sites > 2 {
            b.push((self.sites - 1, 0));
        }
        b
    }

    pub fn are_neighbors(&self, i: usize, j: usize) -> bool {
        self.bonds().iter().any(|&(a, b)| (a, b) == (i, j) || (b, a) == (i, j))
    }

    /// Natural time unit: `1/J`, or `None` when `J = 0` (callers then use
    /// `1/gamma`).
    pub fn time_unit(&self) -> Option<f64> {
        (self.tunneling > 0.0).then(|| 1.0 / self.tunneling)
    }
}

fn check_sites(basis: &FockBasis, spec: &LatticeSpec) -> Result<()> {
    if basis.sites() != spec.sites {
        return Err(Error::InvalidParameter(format!(
            "basis has {} sites but the lattice has {}",
            basis.sites(),
            spec.sites
        )));
    }
    Ok(())
}

/// Sum over bonds of `a_i^dagger a_j + a_j^dagger a_i` (both spins for
/// fermions).
pub fn kinetic_bilinear(basis: &FockBasis, spec: &LatticeSpec) -> Result<SparseOperator> {
    check_sites(basis, spec)?;
    let mut trip = Vec::new();
    for (i, j) in spec.bonds() {
        for op in [hop_op(basis, i, j, None)?, hop_op(basis, j, i, None)?] {
            trip.extend(op.entries());
        }
    }
    Ok(SparseOperator::from_triplets(basis.tag(), basis.dim(), trip))
}

/// `H = -J sum_<ij> (b_i^+ b_j + h.c.) + U/2 sum_i n_i (n_i - 1)`.
pub fn bose_hubbard(basis: &FockBasis, spec: &LatticeSpec) -> Result<SparseOperator> {
    if basis.species() != Species::Boson {
        return Err(Error::Species("Bose-Hubbard needs a bosonic basis".into()));
    }
    let kinetic = kinetic_bilinear(basis, spec)?.scale(C64::new(-spec.tunneling, 0.0));
    let onsite = (0..basis.dim())
        .map(|k| {
            let e: f64 = basis
                .state(k)
                .iter()
                .map(|&n| {
                    let n = n as f64;
                    n * (n - 1.0)
                })
                .sum();
            C64::new(0.5 * spec.interaction * e, 0.0)
        })
        .collect();
    let h = kinetic.add_op(&SparseOperator::diagonal(basis.tag(), onsite))?;
    Ok(h.with_hermitian_flag(true))
}

/// `H = -J sum_sigma sum_<ij> (f_j^+ f_i + h.c.) - U sum_i n_up,i n_down,i`.
pub fn fermi_hubbard(basis: &FockBasis, spec: &LatticeSpec) -> Result<SparseOperator> {
    if basis.species() != Species::FermionSpinHalf {
        return Err(Error::Species("Fermi-Hubbard needs a spin-1/2 fermion basis".into()));
    }
    let kinetic = kinetic_bilinear(basis, spec)?.scale(C64::new(-spec.tunneling, 0.0));
    let doublons = (0..basis.dim())
        .map(|k| {
            let s = basis.state(k);
            let d: f64 = (0..basis.sites())
                .map(|j| {
                    (s[basis.mode_index(j, Spin::Up)] * s[basis.mode_index(j, Spin::Down)]) as f64
                })
                .sum();
            C64::new(-spec.interaction * d, 0.0)
        })
        .collect();
    let h = kinetic.add_op(&SparseOperator::diagonal(basis.tag(), doublons))?;
    Ok(h.with_hermitian_flag(true))
}

/// Dispatches on the basis species.
pub fn hubbard(basis: &FockBasis, spec: &LatticeSpec) -> Result<SparseOperator> {
    match basis.species() {
        Species::Boson => bose_hubbard(basis, spec),
        Species::FermionSpinHalf => fermi_hubbard(basis, spec),
    }
}

/// `H_eff = H0 - (i/2) sum_k c_k^dagger c_k`.
pub fn effective_hamiltonian(h0: &SparseOperator, channels: &[JumpChannel]) -> Result<SparseOperator> {
    let mut h = h0.clone();
    for ch in channels {
        let decay = ch.decay_operator()?;
        h = h.add_op(&decay.scale(C64::new(0.0, -0.5)))?;
    }
    Ok(h.with_hermitian_flag(channels.is_empty() && h0.hermitian()))
}

/// Ground state by restarted Lanczos; residual norm below `1e-10`.
pub fn ground_state(h: &SparseOperator) -> Result<(f64, Vec<C64>)> {
    linalg::lowest_eigenpair(h, 1e-10)
}
