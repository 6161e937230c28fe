//! Closed-form predictions used as oracles for the simulator: the
//! two-mode imbalance dynamics, perturbative Mott states under
//! measurement, the Zeno-subspace effective Hamiltonian and the
//! correlated-tunneling law.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::fock::{hop_op, FockBasis, SparseOperator, Species};
use crate::linalg::{general_eigen, normalized};
use crate::model::{hubbard, kinetic_bilinear, LatticeSpec};
use crate::observables::ModePartition;
use crate::C64;

/// Imbalance between jumps:
/// `z0(t) = exp(-N gamma t / 2) [c0 sin(2Jt) + 2 z00 cos(2Jt)] / 2`.
pub fn z0_between_jumps(t: f64, c0: f64, z00: f64, n: usize, gamma: f64, j: f64) -> f64 {
    0.5 * (-(n as f64) * gamma * t / 2.0).exp() * (c0 * (2.0 * j * t).sin() + 2.0 * z00 * (2.0 * j * t).cos())
}

/// Oscillation envelope driven by jumps, `-1 + (1 + z00) exp(N gamma t)`.
/// Not clamped; callers treat it as an envelope only.
pub fn z0_jump_envelope(t: f64, z00: f64, n: usize, gamma: f64) -> f64 {
    -1.0 + (1.0 + z00) * ((n as f64) * gamma * t).exp()
}

/// Growth exponent of the jump envelope minus the damping exponent
/// between jumps, `N gamma - N gamma / 2`.
pub fn envelope_exponent_gap(n: usize, gamma: f64) -> f64 {
    let n = n as f64;
    n * gamma - n * gamma / 2.0
}

/// Two-mode coherent state on a two-site bosonic basis with imbalance
/// `z0` and relative phase `phase`.
pub fn two_mode_coherent_state(basis: &FockBasis, z0: f64, phase: f64) -> Result<Vec<C64>> {
    if basis.species() != Species::Boson || basis.sites() != 2 {
        return Err(Error::InvalidParameter("two-mode coherent states need two bosonic sites".into()));
    }
    if !(-1.0..=1.0).contains(&z0) {
        return Err(Error::InvalidParameter(format!("z0 must lie in [-1, 1], got {z0}")));
    }
    let n = basis.particles().total();
    let a = ((1.0 + z0) / 2.0).sqrt();
    let b = C64::from_polar(((1.0 - z0) / 2.0).sqrt(), phase);
    let ln_fact = |k: usize| (1..=k).map(|x| (x as f64).ln()).sum::<f64>();
    let psi: Vec<C64> = basis
        .states()
        .map(|s| {
            let (n1, n2) = (s[0] as usize, s[1] as usize);
            let mag = (0.5 * (ln_fact(n) - ln_fact(n1) - ln_fact(n2))).exp();
            b.powu(n2 as u32) * (mag * a.powi(n1 as i32))
        })
        .collect();
    Ok(normalized(&psi))
}

/// Uniform Mott state with `nu = N / L` atoms per site.
pub fn mott_state(basis: &FockBasis) -> Result<Vec<C64>> {
    if basis.species() != Species::Boson {
        return Err(Error::Species("Mott states are built for bosons".into()));
    }
    let (n, l) = (basis.particles().total(), basis.sites());
    if n % l != 0 {
        return Err(Error::InvalidParameter(format!("{n} atoms do not fill {l} sites uniformly")));
    }
    let occ = vec![(n / l) as u8; l];
    Ok(basis.unit_vector(basis.index_of(&occ).expect("uniform filling is in the sector")))
}

/// `|Psi> ~ [1 + J/(U - 4 i gamma) sum_<ij> b_i^dagger b_j] |Mott>`.
pub fn perturbed_mott_state(basis: &FockBasis, lattice: &LatticeSpec, u: f64, gamma: f64) -> Result<Vec<C64>> {
    if u == 0.0 && gamma == 0.0 {
        return Err(Error::InvalidParameter("U and gamma cannot both vanish".into()));
    }
    let mott = mott_state(basis)?;
    let hops = kinetic_bilinear(basis, lattice)?;
    let amp = C64::new(lattice.tunneling, 0.0) / C64::new(u, -4.0 * gamma);
    let excited = hops.apply(&mott);
    let psi: Vec<C64> = mott.iter().zip(&excited).map(|(m, e)| m + amp * e).collect();
    Ok(normalized(&psi))
}

/// `sigma^2 = 8 J^2 L nu (nu + 1) / (U^2 + 16 gamma^2)`.
pub fn sigma2_delta_n(j: f64, u: f64, gamma: f64, l: usize, nu: usize) -> Result<f64> {
    if u == 0.0 && gamma == 0.0 {
        return Err(Error::InvalidParameter("U and gamma cannot both vanish".into()));
    }
    let nu = nu as f64;
    Ok(8.0 * j * j * l as f64 * nu * (nu + 1.0) / (u * u + 16.0 * gamma * gamma))
}

/// `[1 - sech^2(4 J^2 t / gamma)] / 4`.
pub fn pair_correlation_law(t: f64, j: f64, gamma: f64) -> f64 {
    let x = 4.0 * j * j * t / gamma;
    0.25 * (1.0 - 1.0 / x.cosh().powi(2))
}

/// Prefactor `2^m J / (K U)` of the particle-hole admixture after `m`
/// consecutive jumps.
pub fn excitation_amplification(m: u32, j: f64, u: f64, k: usize) -> f64 {
    2f64.powi(m as i32) * j / (k as f64 * u)
}

/// Second-order effective Hamiltonian inside the Zeno subspace of a
/// two-valued diagonal profile.
///
/// `P0` projects onto the `D` eigenspace holding `psi0`. The result is
/// `P0 [-J sum b_i^+ b_j - i J^2/(A gamma) sum_phi sum b_i^+ b_j b_k^+ b_l`
/// `+ H_U] P0` with `i, l` in mode `phi`, `j, k` in its complement, all
/// pairs nearest neighbours, and `A = |J_phi - J_phi'|^2`. It acts on the
/// full basis but vanishes outside the subspace.
pub fn zeno_hamiltonian(
    basis: &FockBasis,
    lattice: &LatticeSpec,
    coefficients: &[C64],
    psi0: &[C64],
    gamma: f64,
) -> Result<SparseOperator> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter("gamma must be positive".into()));
    }
    let partition = ModePartition::from_coefficients(coefficients)?;
    if partition.modes() != 2 {
        return Err(Error::InvalidParameter(format!(
            "the Zeno Hamiltonian needs a two-valued profile, got {} modes",
            partition.modes()
        )));
    }
    let d = crate::fock::weighted_density(basis, coefficients)?.diagonal_values();
    let support: Vec<usize> = (0..psi0.len()).filter(|&k| psi0[k].norm() > 1e-12).collect();
    let d0 = *support.first().map(|&k| &d[k]).ok_or_else(|| Error::InvalidParameter("zero initial state".into()))?;
    if support.iter().any(|&k| (d[k] - d0).norm() > 1e-9) {
        return Err(Error::InvalidParameter("initial state is not inside a single D eigenspace".into()));
    }
    let keep: Vec<bool> = d.iter().map(|x| (x - d0).norm() < 1e-9).collect();

    let j = lattice.tunneling;
    let phi = partition.zone(0);
    let a_const = (coefficients[phi[0]] - coefficients[partition.zone(1)[0]]).norm_sqr();
    let directed: Vec<(usize, usize)> = lattice.bonds().iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
    let mut second = SparseOperator::zeros(basis.tag(), basis.dim());
    for mode in 0..2 {
        let inside = |s: usize| partition.label(s) == mode;
        for &(i, jj) in directed.iter().filter(|&&(i, jj)| inside(i) && !inside(jj)) {
            let left = hop_op(basis, i, jj, None)?;
            for &(k, l) in directed.iter().filter(|&&(k, l)| !inside(k) && inside(l)) {
                second = second.add_op(&left.matmul(&hop_op(basis, k, l, None)?)?)?;
            }
        }
    }
    let kinetic = kinetic_bilinear(basis, lattice)?.scale(C64::new(-j, 0.0));
    let onsite = hubbard(basis, &LatticeSpec { tunneling: 0.0, ..*lattice })?;
    let full = kinetic
        .add_op(&second.scale(C64::new(0.0, -j * j / (a_const * gamma))))?
        .add_op(&onsite)?;
    Ok(full.restrict(&keep).with_hermitian_flag(false))
}

/// Long-time limit of the normalized no-photon evolution from `psi0`: the
/// eigenvector of `h_eff` with the largest imaginary eigenvalue among
/// those present in the expansion of `psi0`.
pub fn nojump_steady_state(h_eff: &SparseOperator, psi0: &[C64]) -> Result<(C64, Vec<C64>)> {
    let (lambdas, vecs) = general_eigen(&h_eff.to_dense());
    let coeffs = vecs
        .clone()
        .lu()
        .solve(&DVector::from_column_slice(psi0))
        .ok_or(Error::NoConvergence { residual: f64::INFINITY, iterations: 0 })?;
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let best = (0..lambdas.len())
        .filter(|&k| coeffs[k].norm() > 1e-8 * scale)
        .max_by(|&a, &b| lambdas[a].im.total_cmp(&lambdas[b].im))
        .ok_or_else(|| Error::InvalidParameter("initial state has no overlap with any eigenvector".into()))?;
    Ok((lambdas[best], normalized(vecs.column(best).as_slice())))
}
