use std::collections::HashMap;

use nalgebra::DMatrix;

use super::partition::ModePartition;
use crate::error::{Error, Result};
use crate::fock::{FockBasis, SparseOperator, Species, Spin};
use crate::linalg::{dot, norm_sqr};
use crate::C64;

fn check_normalized(psi: &[C64]) -> Result<()> {
    let n = norm_sqr(psi);
    if (n - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(n.sqrt()));
    }
    Ok(())
}

fn check_dim(basis: &FockBasis, len: usize) -> Result<()> {
    if len != basis.dim() {
        return Err(Error::InvalidParameter(format!("state has length {len}, basis dimension is {}", basis.dim())));
    }
    Ok(())
}

/// Number of particles on `zone` for every basis state.
pub fn zone_counts(basis: &FockBasis, zone: &[usize]) -> Result<Vec<usize>> {
    for &j in zone {
        basis.check_site(j)?;
    }
    Ok((0..basis.dim()).map(|k| zone.iter().map(|&j| basis.site_occupation(k, j) as usize).sum()).collect())
}

/// `<psi|A|psi>` for normalized `psi`.
pub fn expectation(op: &SparseOperator, psi: &[C64]) -> C64 {
    op.expectation(psi)
}

/// `<A^dagger A> - |<A>|^2`, the usual variance for Hermitian `A`.
pub fn variance(op: &SparseOperator, psi: &[C64]) -> f64 {
    let a = op.apply(psi);
    norm_sqr(&a) - dot(psi, &a).norm_sqr()
}

/// `p(N_l = m)` for `m = 0..=N`.
pub fn mode_number_distribution(
    basis: &FockBasis,
    psi: &[C64],
    partition: &ModePartition,
    mode: usize,
) -> Result<Vec<f64>> {
    check_dim(basis, psi.len())?;
    if partition.sites() != basis.sites() || mode >= partition.modes() {
        return Err(Error::InvalidParameter("partition does not match the lattice".into()));
    }
    let counts = zone_counts(basis, &partition.zone(mode))?;
    let mut p = vec![0.0; basis.particles().total() + 1];
    for (k, z) in psi.iter().enumerate() {
        p[counts[k]] += z.norm_sqr();
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

/// `<n_j>` for every site.
pub fn site_densities(basis: &FockBasis, psi: &[C64]) -> Vec<f64> {
    let mut n = vec![0.0; basis.sites()];
    for (k, z) in psi.iter().enumerate() {
        let w = z.norm_sqr();
        for (j, nj) in n.iter_mut().enumerate() {
            *nj += w * basis.site_occupation(k, j) as f64;
        }
    }
    n
}

fn check_disjoint(a: &[usize], b: &[usize]) -> Result<()> {
    match a.iter().find(|j| b.contains(j)) {
        Some(&j) => Err(Error::OverlappingZones(j)),
        None => Ok(()),
    }
}

/// `<N_A N_B> - <N_A><N_B>` for disjoint zones.
pub fn number_correlations(basis: &FockBasis, psi: &[C64], a: &[usize], b: &[usize]) -> Result<f64> {
    check_dim(basis, psi.len())?;
    check_disjoint(a, b)?;
    let (ca, cb) = (zone_counts(basis, a)?, zone_counts(basis, b)?);
    let (mut nab, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (k, z) in psi.iter().enumerate() {
        let w = z.norm_sqr();
        nab += w * (ca[k] * cb[k]) as f64;
        na += w * ca[k] as f64;
        nb += w * cb[k] as f64;
    }
    Ok(nab - na * nb)
}

/// `z = (<N_1> - <N_2>) / N` for a two-mode partition.
pub fn imbalance(basis: &FockBasis, psi: &[C64], partition: &ModePartition) -> Result<f64> {
    if partition.modes() != 2 {
        return Err(Error::InvalidParameter(format!("imbalance needs 2 modes, got {}", partition.modes())));
    }
    let n1 = zone_counts(basis, &partition.zone(0))?;
    let n2 = zone_counts(basis, &partition.zone(1))?;
    let total = basis.particles().total() as f64;
    let z: f64 = psi.iter().enumerate().map(|(k, c)| c.norm_sqr() * (n1[k] as f64 - n2[k] as f64)).sum();
    Ok(z / total)
}

/// Factorization of every basis state into subsystem-A and subsystem-B
/// configurations, with the fermionic sign of moving all A modes first.
struct Bipartition {
    /// Per basis state: (block, row within block, column within block, sign).
    place: Vec<(usize, usize, usize, f64)>,
    /// (rows, columns) of every block.
    shapes: Vec<(usize, usize)>,
}

fn bipartition(basis: &FockBasis, zone_a: &[usize]) -> Result<Bipartition> {
    for &j in zone_a {
        basis.check_site(j)?;
    }
    let modes = basis.modes();
    let mut in_a = vec![false; modes];
    let spins: &[Spin] = match basis.species() {
        Species::Boson => &[Spin::Up],
        Species::FermionSpinHalf => &[Spin::Up, Spin::Down],
    };
    for &j in zone_a {
        for &s in spins {
            in_a[basis.mode_index(j, s)] = true;
        }
    }
    let fermions = basis.species() == Species::FermionSpinHalf;
    let mut blocks: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut rows: Vec<HashMap<Vec<u8>, usize>> = Vec::new();
    let mut cols: Vec<HashMap<Vec<u8>, usize>> = Vec::new();
    let mut place = Vec::with_capacity(basis.dim());
    for occ in basis.states() {
        let a: Vec<u8> = (0..modes).filter(|&m| in_a[m]).map(|m| occ[m]).collect();
        let b: Vec<u8> = (0..modes).filter(|&m| !in_a[m]).map(|m| occ[m]).collect();
        // block key: particle content of A per spin species
        let key: Vec<u8> = spins
            .iter()
            .map(|&s| zone_a.iter().map(|&j| occ[basis.mode_index(j, s)]).sum())
            .collect();
        let next = blocks.len();
        let blk = *blocks.entry(key).or_insert(next);
        if blk == rows.len() {
            rows.push(HashMap::new());
            cols.push(HashMap::new());
        }
        let nr = rows[blk].len();
        let r = *rows[blk].entry(a).or_insert(nr);
        let nc = cols[blk].len();
        let c = *cols[blk].entry(b).or_insert(nc);
        let mut sign = 1.0;
        if fermions {
            let mut b_before = 0u32;
            let mut swaps = 0u32;
            for m in 0..modes {
                if occ[m] == 1 {
                    if in_a[m] {
                        swaps += b_before;
                    } else {
                        b_before += 1;
                    }
                }
            }
            if swaps % 2 == 1 {
                sign = -1.0;
            }
        }
        place.push((blk, r, c, sign));
    }
    let shapes = rows.iter().zip(&cols).map(|(r, c)| (r.len(), c.len())).collect();
    Ok(Bipartition { place, shapes })
}

fn entropy_of(probabilities: impl Iterator<Item = f64>) -> f64 {
    -probabilities.filter(|&p| p > 1e-300).map(|p| p * p.ln()).sum::<f64>()
}

/// Von Neumann entropy (nats) of the reduced state of the sites in
/// `zone_a`, from the Schmidt values of each particle-number block.
pub fn entanglement_entropy(basis: &FockBasis, psi: &[C64], zone_a: &[usize]) -> Result<f64> {
    check_dim(basis, psi.len())?;
    check_normalized(psi)?;
    let bp = bipartition(basis, zone_a)?;
    let mut mats: Vec<DMatrix<C64>> = bp.shapes.iter().map(|&(r, c)| DMatrix::zeros(r, c)).collect();
    for (k, &(blk, r, c, sign)) in bp.place.iter().enumerate() {
        mats[blk][(r, c)] = psi[k] * sign;
    }
    let mut s = 0.0;
    for m in mats {
        let sv = m.singular_values();
        s += entropy_of(sv.iter().map(|x| x * x));
    }
    Ok(s.max(0.0))
}

/// Entropy (nats) of the reduced density matrix of `zone_a` for a mixed
/// state `rho`.
pub fn reduced_entropy(basis: &FockBasis, rho: &DMatrix<C64>, zone_a: &[usize]) -> Result<f64> {
    check_dim(basis, rho.nrows())?;
    let bp = bipartition(basis, zone_a)?;
    let mut reduced: Vec<DMatrix<C64>> = bp.shapes.iter().map(|&(r, _)| DMatrix::zeros(r, r)).collect();
    // group basis states by (block, column) so that rho_A[a, a'] sums over shared b
    let mut by_col: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (k, &(blk, _, c, _)) in bp.place.iter().enumerate() {
        by_col.entry((blk, c)).or_default().push(k);
    }
    for ks in by_col.values() {
        for &k in ks {
            for &l in ks {
                let (blk, r, _, s1) = bp.place[k];
                let (_, r2, _, s2) = bp.place[l];
                reduced[blk][(r, r2)] += rho[(k, l)] * (s1 * s2);
            }
        }
    }
    let mut s = 0.0;
    for m in reduced {
        let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        s += entropy_of(herm.symmetric_eigenvalues().iter().copied());
    }
    Ok(s.max(0.0))
}
