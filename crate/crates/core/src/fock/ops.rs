use crate::error::{Error, Result};
use crate::fock::{FockBasis, SparseOperator, Species, Spin};
use crate::C64;

fn spins(basis: &FockBasis, spin: Option<Spin>) -> Vec<Spin> {
    match (basis.species(), spin) {
        (Species::Boson, _) => vec![Spin::Up],
        (Species::FermionSpinHalf, Some(s)) => vec![s],
        (Species::FermionSpinHalf, None) => vec![Spin::Up, Spin::Down],
    }
}

/// Occupation-number operator. For fermions `spin = None` gives the total
/// site density `n_up + n_down`; bosons ignore `spin`.
pub fn number_op(basis: &FockBasis, site: usize, spin: Option<Spin>) -> Result<SparseOperator> {
    basis.check_site(site)?;
    let modes: Vec<usize> = spins(basis, spin).into_iter().map(|s| basis.mode_index(site, s)).collect();
    let diag = basis
        .states()
        .map(|s| C64::new(modes.iter().map(|&m| s[m] as f64).sum(), 0.0))
        .collect();
    Ok(SparseOperator::diagonal(basis.tag(), diag))
}

/// Hopping bilinear `a_i^dagger a_j` (creates on `i`, annihilates on `j`).
///
/// Bosonic elements carry `sqrt(n_i + 1) sqrt(n_j)`. Fermionic elements
/// carry the sign `(-1)^p` with `p` the number of occupied modes strictly
/// between the two modes in the canonical ordering (spin-up block first,
/// sites ascending). For fermions `spin = None` sums both spin species.
pub fn hop_op(basis: &FockBasis, i: usize, j: usize, spin: Option<Spin>) -> Result<SparseOperator> {
    basis.check_site(i)?;
    basis.check_site(j)?;
    if i == j {
        return Err(Error::EqualSites(i));
    }
    let mut trip = Vec::new();
    let mut scratch = vec![0u8; basis.modes()];
    for s in spins(basis, spin) {
        let (a, b) = (basis.mode_index(i, s), basis.mode_index(j, s));
        for (k, occ) in basis.states().enumerate() {
            if occ[b] == 0 {
                continue;
            }
            scratch.copy_from_slice(occ);
            let amp = match basis.species() {
                Species::Boson => {
                    let nj = scratch[b] as f64;
                    scratch[b] -= 1;
                    let ni = scratch[a] as f64;
                    scratch[a] += 1;
                    (nj * (ni + 1.0)).sqrt()
                }
                Species::FermionSpinHalf => {
                    if occ[a] == 1 {
                        continue;
                    }
                    let (lo, hi) = (a.min(b), a.max(b));
                    let crossed: u32 = occ[lo + 1..hi].iter().map(|&n| n as u32).sum();
                    scratch[b] = 0;
                    scratch[a] = 1;
                    if crossed % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            let row = basis
                .index_of(&scratch)
                .expect("hopping stays within the fixed-number sector");
            trip.push((row, k, C64::new(amp, 0.0)));
        }
    }
    Ok(SparseOperator::from_triplets(basis.tag(), basis.dim(), trip))
}

/// Total particle number operator (equal to `N` times the identity).
pub fn total_number_op(basis: &FockBasis) -> SparseOperator {
    let n = basis.particles().total() as f64;
    SparseOperator::diagonal(basis.tag(), vec![C64::new(n, 0.0); basis.dim()])
}

/// Diagonal operator `sum_j w_j n_j` over the given weights.
pub fn weighted_density(basis: &FockBasis, weights: &[C64]) -> Result<SparseOperator> {
    if weights.len() != basis.sites() {
        return Err(Error::GeometryLength { expected: basis.sites(), got: weights.len() });
    }
    let diag = (0..basis.dim())
        .map(|k| {
            weights
                .iter()
                .enumerate()
                .map(|(j, w)| w * basis.site_occupation(k, j) as f64)
                .sum()
        })
        .collect();
    Ok(SparseOperator::diagonal(basis.tag(), diag))
}

/// Diagonal operator `sum_j w_j (n_up,j - n_down,j)`; requires fermions.
pub fn weighted_magnetization(basis: &FockBasis, weights: &[C64]) -> Result<SparseOperator> {
    if basis.species() != Species::FermionSpinHalf {
        return Err(Error::Species("magnetization needs a spin-1/2 fermion basis".into()));
    }
    if weights.len() != basis.sites() {
        return Err(Error::GeometryLength { expected: basis.sites(), got: weights.len() });
    }
    let diag = (0..basis.dim())
        .map(|k| {
            weights
                .iter()
                .enumerate()
                .map(|(j, w)| w * basis.site_magnetization(k, j) as f64)
                .sum()
        })
        .collect();
    Ok(SparseOperator::diagonal(basis.tag(), diag))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn number_eigenvalues() {
        let b = FockBasis::bosons(2, 2).unwrap();
        let n0 = number_op(&b, 0, None).unwrap();
        let k = b.index_of(&[2, 0]).unwrap();
        assert_eq!(n0.get(k, k), c(2.0));

        let f = FockBasis::fermions(2, 1, 1).unwrap();
        let nup = number_op(&f, 0, Some(Spin::Up)).unwrap();
        let k = f.fock_index(&[1, 0], Some(&[1, 0])).unwrap();
        assert_eq!(nup.get(k, k), c(1.0));
        let ntot = number_op(&f, 0, None).unwrap();
        assert_eq!(ntot.get(k, k), c(2.0));
    }

    #[test]
    fn number_operators_sum_to_n() {
        for b in [FockBasis::bosons(4, 3).unwrap(), FockBasis::fermions(3, 2, 1).unwrap()] {
            let mut sum = SparseOperator::zeros(b.tag(), b.dim());
            for j in 0..b.sites() {
                sum = sum.add_op(&number_op(&b, j, None).unwrap()).unwrap();
            }
            let expect = total_number_op(&b);
            assert!(sum.sub_op(&expect).unwrap().frobenius_norm() < 1e-14);
        }
    }

    #[test]
    fn single_boson_hop() {
        let b = FockBasis::bosons(2, 1).unwrap();
        let h = hop_op(&b, 0, 1, None).unwrap();
        let from = b.index_of(&[0, 1]).unwrap();
        let to = b.index_of(&[1, 0]).unwrap();
        assert_eq!(h.get(to, from), c(1.0));
        assert_eq!(h.nnz(), 1);
    }

    #[test]
    fn boson_ladder_factor() {
        let b = FockBasis::bosons(2, 2).unwrap();
        let h = hop_op(&b, 0, 1, None).unwrap();
        let from = b.index_of(&[1, 1]).unwrap();
        let to = b.index_of(&[2, 0]).unwrap();
        assert!((h.get(to, from) - c(2f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn hop_errors() {
        let b = FockBasis::bosons(3, 1).unwrap();
        assert!(matches!(hop_op(&b, 1, 1, None), Err(Error::EqualSites(1))));
        assert!(matches!(hop_op(&b, 0, 3, None), Err(Error::SiteOutOfRange { site: 3, sites: 3 })));
        assert!(matches!(number_op(&b, 5, None), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn fermion_hop_sign_crosses_occupied_mode() {
        // up: sites 0 and 2 hop across an occupied site 1
        let f = FockBasis::fermions(3, 2, 0).unwrap();
        let h = hop_op(&f, 2, 0, Some(Spin::Up)).unwrap();
        let from = f.fock_index(&[1, 1, 0], Some(&[0, 0, 0])).unwrap();
        let to = f.fock_index(&[0, 1, 1], Some(&[0, 0, 0])).unwrap();
        assert_eq!(h.get(to, from), c(-1.0));
        let from = f.fock_index(&[1, 0, 1], Some(&[0, 0, 0])).unwrap();
        let h01 = hop_op(&f, 1, 0, Some(Spin::Up)).unwrap();
        let to = f.fock_index(&[0, 1, 1], Some(&[0, 0, 0])).unwrap();
        assert_eq!(h01.get(to, from), c(1.0));
    }
}
