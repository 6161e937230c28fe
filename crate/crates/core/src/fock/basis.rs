use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default dimension cap for bases used by the trajectory engine.
pub const TRAJECTORY_DIMENSION_CAP: usize = 200_000;
/// Default dimension cap for bases used by the dense master-equation oracle.
pub const MASTER_DIMENSION_CAP: usize = 2_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Species {
    Boson,
    FermionSpinHalf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

/// Particle content of a fixed-number sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Particles {
    Bosons(usize),
    Fermions { up: usize, down: usize },
}

impl Particles {
    pub fn species(&self) -> Species {
        match self {
            Particles::Bosons(_) => Species::Boson,
            Particles::Fermions { .. } => Species::FermionSpinHalf,
        }
    }

    pub fn total(&self) -> usize {
        match *self {
            Particles::Bosons(n) => n,
            Particles::Fermions { up, down } => up + down,
        }
    }
}

/// Cheap identity of a basis, carried by every operator so that mixing
/// operators from different sectors is caught.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisTag {
    pub sites: usize,
    pub particles: Particles,
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.particles {
            Particles::Bosons(n) => write!(f, "bosons(L={}, N={})", self.sites, n),
            Particles::Fermions { up, down } => {
                write!(f, "fermions(L={}, up={}, down={})", self.sites, up, down)
            }
        }
    }
}

/// Occupation-number basis of a fixed particle-number sector.
///
/// States are stored as occupation vectors in lexicographic (ascending)
/// order. Bosonic vectors have one entry per site. Fermionic vectors have
/// `2 L` entries: the spin-up block (sites ascending) followed by the
/// spin-down block; this is also the canonical mode ordering that fixes
/// fermionic signs.
///
/// Sites are 0-based: index `j` is lattice site `j + 1`.
#[derive(Clone, Debug)]
pub struct FockBasis {
    sites: usize,
    particles: Particles,
    modes: usize,
    states: Vec<u8>,
    dim: usize,
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Dimension of a sector without enumerating it.
pub fn sector_dimension(sites: usize, particles: Particles) -> u128 {
    match particles {
        Particles::Bosons(n) => binomial(n + sites - 1, n),
        Particles::Fermions { up, down } => binomial(sites, up) * binomial(sites, down),
    }
}

/// Appends every length-`len` vector with entries in `0..=max` summing to
/// `total`, in lexicographic order.
fn compositions(len: usize, total: usize, max: usize, out: &mut Vec<Vec<u8>>) {
    fn rec(prefix: &mut Vec<u8>, len: usize, left: usize, max: usize, out: &mut Vec<Vec<u8>>) {
        if prefix.len() + 1 == len {
            if left <= max {
                prefix.push(left as u8);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        for n in 0..=left.min(max) {
            prefix.push(n as u8);
            rec(prefix, len, left - n, max, out);
            prefix.pop();
        }
    }
    if len == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return;
    }
    rec(&mut Vec::with_capacity(len), len, total, max, out);
}

impl FockBasis {
    pub fn bosons(sites: usize, n: usize) -> Result<Self> {
        Self::build(sites, Particles::Bosons(n), TRAJECTORY_DIMENSION_CAP)
    }

    pub fn fermions(sites: usize, up: usize, down: usize) -> Result<Self> {
        Self::build(sites, Particles::Fermions { up, down }, TRAJECTORY_DIMENSION_CAP)
    }

    /// Enumerates the sector, refusing it when its dimension exceeds `cap`.
    pub fn build(sites: usize, particles: Particles, cap: usize) -> Result<Self> {
        if sites == 0 {
            return Err(Error::InvalidParameter("a lattice needs at least one site".into()));
        }
        if let Particles::Fermions { up, down } = particles {
            for n in [up, down] {
                if n > sites {
                    return Err(Error::PauliViolation { particles: n, sites });
                }
            }
        }
        if let Particles::Bosons(n) = particles {
            if n > u8::MAX as usize {
                return Err(Error::InvalidParameter(format!(
                    "{n} bosons exceed the per-site occupation storage"
                )));
            }
        }
        let dim = sector_dimension(sites, particles);
        if dim > cap as u128 {
            return Err(Error::DimensionCap { dim, cap });
        }
        let dim = dim as usize;

        let (modes, states) = match particles {
            Particles::Bosons(n) => {
                let mut vs = Vec::with_capacity(dim);
                compositions(sites, n, n, &mut vs);
                (sites, vs.concat())
            }
            Particles::Fermions { up, down } => {
                let mut ups = Vec::new();
                let mut downs = Vec::new();
                compositions(sites, up, 1, &mut ups);
                compositions(sites, down, 1, &mut downs);
                let mut flat = Vec::with_capacity(dim * 2 * sites);
                for u in &ups {
                    for d in &downs {
                        flat.extend_from_slice(u);
                        flat.extend_from_slice(d);
                    }
                }
                (2 * sites, flat)
            }
        };
        debug_assert_eq!(states.len(), dim * modes);
        Ok(Self { sites, particles, modes, states, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> Particles {
        self.particles
    }

    pub fn species(&self) -> Species {
        self.particles.species()
    }

    /// Number of single-particle modes (sites, or site-spin pairs).
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn tag(&self) -> BasisTag {
        BasisTag { sites: self.sites, particles: self.particles }
    }

    pub fn state(&self, k: usize) -> &[u8] {
        &self.states[k * self.modes..(k + 1) * self.modes]
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = &[u8]> + '_ {
        self.states.chunks_exact(self.modes)
    }

    /// Ordinal of an occupation vector, by binary search over the sorted
    /// state list.
    pub fn index_of(&self, occupations: &[u8]) -> Option<usize> {
        if occupations.len() != self.modes {
            return None;
        }
        let (mut lo, mut hi) = (0usize, self.dim);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.state(mid).cmp(occupations) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.sites {
            Err(Error::SiteOutOfRange { site, sites: self.sites })
        } else {
            Ok(())
        }
    }

    /// Position of (site, spin) in an occupation vector. Bosonic bases
    /// ignore the spin.
    pub fn mode_index(&self, site: usize, spin: Spin) -> usize {
        match (self.species(), spin) {
            (Species::Boson, _) | (Species::FermionSpinHalf, Spin::Up) => site,
            (Species::FermionSpinHalf, Spin::Down) => self.sites + site,
        }
    }

    /// Total number of particles on `site` in state `k` (both spins for
    /// fermions).
    pub fn site_occupation(&self, k: usize, site: usize) -> u8 {
        let s = self.state(k);
        match self.species() {
            Species::Boson => s[site],
            Species::FermionSpinHalf => s[site] + s[self.sites + site],
        }
    }

    /// Per-site spin magnetization n_up - n_down (zero for bosons).
    pub fn site_magnetization(&self, k: usize, site: usize) -> i32 {
        match self.species() {
            Species::Boson => 0,
            Species::FermionSpinHalf => {
                let s = self.state(k);
                s[site] as i32 - s[self.sites + site] as i32
            }
        }
    }

    /// Basis index of a bosonic occupation vector or a fermionic
    /// (up, down) pair of site occupations.
    pub fn fock_index(&self, up_or_bosons: &[u8], down: Option<&[u8]>) -> Option<usize> {
        match (self.species(), down) {
            (Species::Boson, None) => self.index_of(up_or_bosons),
            (Species::FermionSpinHalf, Some(d)) => {
                let mut v = up_or_bosons.to_vec();
                v.extend_from_slice(d);
                self.index_of(&v)
            }
            _ => None,
        }
    }

    /// Normalized basis vector for one occupation configuration.
    pub fn unit_vector(&self, k: usize) -> Vec<crate::C64> {
        let mut v = vec![crate::C64::new(0.0, 0.0); self.dim];
        v[k] = crate::C64::new(1.0, 0.0);
        v
    }
}
