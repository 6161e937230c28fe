//! Fermionic operators against a brute-force Jordan-Wigner construction on
//! the full `2^(2L)` occupation space.

use nalgebra::DMatrix;

use backaction::fock::{hop_op, number_op, FockBasis, Spin};
use backaction::model::{fermi_hubbard, LatticeSpec};
use backaction::C64;

/// `c_m` on a bitstring: zero if mode `m` is empty, otherwise the bit is
/// cleared with sign `(-1)^(occupied modes below m)`.
fn annihilate(bits: u32, m: usize) -> Option<(u32, f64)> {
    if bits >> m & 1 == 0 {
        return None;
    }
    let below = (bits & ((1 << m) - 1)).count_ones();
    Some((bits & !(1 << m), if below % 2 == 0 { 1.0 } else { -1.0 }))
}

fn create(bits: u32, m: usize) -> Option<(u32, f64)> {
    if bits >> m & 1 == 1 {
        return None;
    }
    let below = (bits & ((1 << m) - 1)).count_ones();
    Some((bits | 1 << m, if below % 2 == 0 { 1.0 } else { -1.0 }))
}

fn bits_of(occ: &[u8]) -> u32 {
    occ.iter().enumerate().map(|(m, &n)| (n as u32) << m).sum()
}

/// Matrix of `c_a^dagger c_b` in the sector basis.
fn dense_hop(basis: &FockBasis, a: usize, b: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(basis.dim(), basis.dim());
    let index: std::collections::HashMap<u32, usize> = (0..basis.dim()).map(|k| (bits_of(basis.state(k)), k)).collect();
    for k in 0..basis.dim() {
        let Some((mid, s1)) = annihilate(bits_of(basis.state(k)), b) else { continue };
        let Some((out, s2)) = create(mid, a) else { continue };
        m[(index[&out], k)] += C64::new(s1 * s2, 0.0);
    }
    m
}

fn dense_number(basis: &FockBasis, a: usize) -> DMatrix<C64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        basis.dim(),
        (0..basis.dim()).map(|k| C64::new(basis.state(k)[a] as f64, 0.0)),
    ))
}

#[test]
fn hopping_matches_for_every_mode_pair() {
    for (l, up, down) in [(3, 1, 2), (4, 2, 2), (4, 3, 1), (5, 2, 3)] {
        let basis = FockBasis::fermions(l, up, down).unwrap();
        for spin in [Spin::Up, Spin::Down] {
            for i in 0..l {
                for j in (0..l).filter(|&j| j != i) {
                    let ours = hop_op(&basis, i, j, Some(spin)).unwrap().to_dense();
                    let (a, b) = (basis.mode_index(i, spin), basis.mode_index(j, spin));
                    let oracle = dense_hop(&basis, a, b);
                    assert_eq!(ours, oracle, "L={l} up={up} down={down} {spin:?} {i}<-{j}");
                }
            }
        }
    }
}

#[test]
fn hubbard_hamiltonian_matches_periodic_and_open() {
    for periodic in [false, true] {
        let basis = FockBasis::fermions(4, 2, 2).unwrap();
        let mut lat = LatticeSpec::new(4, 0.7, 3.0).unwrap();
        if periodic {
            lat = lat.periodic();
        }
        let ours = fermi_hubbard(&basis, &lat).unwrap().to_dense();
        let mut oracle = DMatrix::<C64>::zeros(basis.dim(), basis.dim());
        for (i, j) in lat.bonds() {
            for spin in [Spin::Up, Spin::Down] {
                let (a, b) = (basis.mode_index(i, spin), basis.mode_index(j, spin));
                oracle -= (dense_hop(&basis, a, b) + dense_hop(&basis, b, a)) * C64::new(lat.tunneling, 0.0);
            }
        }
        for site in 0..4 {
            let (u, d) = (basis.mode_index(site, Spin::Up), basis.mode_index(site, Spin::Down));
            oracle -= dense_number(&basis, u) * dense_number(&basis, d) * C64::new(lat.interaction, 0.0);
        }
        assert!((ours - oracle).camax() < 1e-14, "periodic = {periodic}");
    }
}

#[test]
fn anticommutation_survives_restriction() {
    // {c_a^+ c_b, c_b^+ c_a} relations reduce to n_a (1 - n_b) + n_b (1 - n_a)
    let basis = FockBasis::fermions(4, 2, 1).unwrap();
    let n = |site, spin| number_op(&basis, site, Some(spin)).unwrap().to_dense();
    let one = DMatrix::<C64>::identity(basis.dim(), basis.dim());
    for spin in [Spin::Up, Spin::Down] {
        for i in 0..4 {
            for j in (0..4).filter(|&j| j != i) {
                let x = hop_op(&basis, i, j, Some(spin)).unwrap().to_dense();
                let y = hop_op(&basis, j, i, Some(spin)).unwrap().to_dense();
                let lhs = &x * &y + &y * &x;
                let rhs = n(i, spin) * (&one - n(j, spin)) + n(j, spin) * (&one - n(i, spin));
                assert!((lhs - rhs).camax() < 1e-14);
            }
        }
    }
}
