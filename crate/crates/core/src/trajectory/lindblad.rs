use nalgebra::DMatrix;

use super::integrator::{Derivative, Dp54, Tolerances};
use crate::error::{Error, Result};
use crate::fock::{SparseOperator, MASTER_DIMENSION_CAP};
use crate::model::effective_hamiltonian;
use crate::probe::JumpChannel;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MasterConfig {
    pub tol: Tolerances,
    pub cap: usize,
}

impl Default for MasterConfig {
    fn default() -> Self {
        Self { tol: Tolerances { rtol: 1e-9, atol: 1e-11, dt_max: 0.05 }, cap: MASTER_DIMENSION_CAP }
    }
}

/// `d rho/dt = -i (H_eff rho - rho H_eff^dagger) + sum_k c_k rho c_k^dagger`
/// on a row-major flattened `rho`.
struct Liouvillian<'a> {
    h_eff: SparseOperator,
    channels: &'a [JumpChannel],
    dim: usize,
    a: Vec<C64>,
    b: Vec<C64>,
    c: Vec<C64>,
}

fn adjoint_into(d: usize, m: &[C64], out: &mut [C64]) {
    for r in 0..d {
        for c in 0..d {
            out[c * d + r] = m[r * d + c].conj();
        }
    }
}

impl Derivative for Liouvillian<'_> {
    fn eval(&mut self, y: &[C64], dy: &mut [C64]) {
        let d = self.dim;
        self.h_eff.mul_dense_into(y, &mut self.a);
        adjoint_into(d, y, &mut self.b);
        self.h_eff.mul_dense_into(&self.b, &mut self.c);
        // rho H_eff^dagger = (H_eff rho^dagger)^dagger
        for r in 0..d {
            for c in 0..d {
                let v = self.a[r * d + c] - self.c[c * d + r].conj();
                dy[r * d + c] = C64::new(v.im, -v.re);
            }
        }
        for ch in self.channels {
            ch.op().mul_dense_into(y, &mut self.a);
            adjoint_into(d, &self.a, &mut self.b);
            ch.op().mul_dense_into(&self.b, &mut self.a);
            dy.iter_mut().zip(&self.a).for_each(|(o, v)| *o += v);
        }
    }
}

pub fn pure_state(psi: &[C64]) -> DMatrix<C64> {
    let n = psi.len();
    DMatrix::from_fn(n, n, |r, c| psi[r] * psi[c].conj())
}

/// `(1/2) sum |eigenvalues of (a - b)|` for Hermitian `a`, `b`.
pub fn trace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let diff = a - b;
    let herm = (&diff + diff.adjoint()) * C64::new(0.5, 0.0);
    0.5 * herm.symmetric_eigenvalues().iter().map(|x| x.abs()).sum::<f64>()
}

fn check_density_matrix(rho: &DMatrix<C64>) -> Result<()> {
    let defect = (rho - rho.adjoint()).camax();
    if defect > 1e-10 {
        return Err(Error::InvalidParameter(format!("rho is not Hermitian (defect {defect:.3e})")));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(Error::InvalidParameter(format!("rho has trace {tr}, expected 1")));
    }
    let min = rho.clone().symmetric_eigenvalues().min();
    if min < -1e-10 {
        return Err(Error::InvalidParameter(format!("rho has negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// Integrates the master equation and calls `observe(t, rho)` at each
/// entry of the ascending grid `times` (which may start at 0). Returns
/// the state at the last grid point.
pub fn lindblad_evolve(
    rho0: &DMatrix<C64>,
    h0: &SparseOperator,
    channels: &[JumpChannel],
    times: &[f64],
    cfg: &MasterConfig,
    mut observe: impl FnMut(f64, &DMatrix<C64>),
) -> Result<DMatrix<C64>> {
    let d = h0.dim();
    if d > cfg.cap {
        return Err(Error::DimensionCap { dim: d as u128, cap: cfg.cap });
    }
    if rho0.nrows() != d || rho0.ncols() != d {
        return Err(Error::InvalidParameter(format!("rho is {}x{}, basis has dimension {d}", rho0.nrows(), rho0.ncols())));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParameter("time grid must be ascending and non-negative".into()));
    }
    check_density_matrix(rho0)?;
    let h_eff = effective_hamiltonian(h0, channels)?;
    let scale = h_eff.norm_inf() + channels.iter().map(|c| c.op().norm_inf().powi(2)).sum::<f64>();
    let h_init = if scale > 0.0 { (0.1 / scale).min(cfg.tol.dt_max) } else { cfg.tol.dt_max };
    let zero = C64::new(0.0, 0.0);
    let f = Liouvillian { h_eff, channels, dim: d, a: vec![zero; d * d], b: vec![zero; d * d], c: vec![zero; d * d] };
    let mut rk = Dp54::new(f, d * d, cfg.tol, h_init);

    let mut y: Vec<C64> = (0..d * d).map(|k| rho0[(k / d, k % d)]).collect();
    let to_matrix = |y: &[C64]| DMatrix::from_row_slice(d, d, y);
    let mut t = 0.0;
    for &target in times {
        if target > t {
            rk.advance(&mut y, t, target - t)?;
            t = target;
        }
        observe(t, &to_matrix(&y));
    }
    Ok(to_matrix(&y))
}

/// Convenience wrapper collecting `rho(t)` for every grid time.
pub fn lindblad_series(
    rho0: &DMatrix<C64>,
    h0: &SparseOperator,
    channels: &[JumpChannel],
    times: &[f64],
    cfg: &MasterConfig,
) -> Result<Vec<DMatrix<C64>>> {
    let mut out = Vec::with_capacity(times.len());
    lindblad_evolve(rho0, h0, channels, times, cfg, |_, r| out.push(r.clone()))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockBasis;
    use crate::model::{bose_hubbard, ground_state, LatticeSpec};
    use crate::probe::{build_channels, Coupling, Geometry, Probe};

    #[test]
    fn eigenprojector_is_stationary_without_channels() {
        let b = FockBasis::bosons(3, 2).unwrap();
        let h = bose_hubbard(&b, &LatticeSpec::new(3, 1.0, 1.5).unwrap()).unwrap();
        let (_, g) = ground_state(&h).unwrap();
        let rho0 = pure_state(&g);
        let out = lindblad_series(&rho0, &h, &[], &[0.0, 1.0, 3.0], &MasterConfig::default()).unwrap();
        for r in out {
            assert!((r - &rho0).camax() < 1e-8);
        }
    }

    #[test]
    fn dephasing_leaves_diagonal_states_alone() {
        let b = FockBasis::bosons(3, 2).unwrap();
        let lat = LatticeSpec::new(3, 0.0, 1.0).unwrap();
        let h = bose_hubbard(&b, &lat).unwrap();
        let ch = build_channels(&b, &lat, &Probe::new(Geometry::OddSites, Coupling::Direct { gamma: 2.0 })).unwrap();
        let diag: Vec<C64> = (0..b.dim()).map(|k| C64::new(1.0 + k as f64, 0.0)).collect();
        let tr: C64 = diag.iter().sum();
        let rho0 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)) / tr;
        let last = lindblad_evolve(&rho0, &h, &ch, &[0.0, 2.0], &MasterConfig::default(), |_, _| {}).unwrap();
        assert!((last - rho0).camax() < 1e-10);
    }

    #[test]
    fn trace_and_positivity_are_preserved() {
        let b = FockBasis::bosons(4, 2).unwrap();
        let lat = LatticeSpec::new(4, 1.0, 1.0).unwrap();
        let h = bose_hubbard(&b, &lat).unwrap();
        let ch = build_channels(&b, &lat, &Probe::new(Geometry::OddSites, Coupling::Direct { gamma: 1.0 })).unwrap();
        let psi0 = b.unit_vector(b.index_of(&[2, 0, 0, 0]).unwrap());
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.5).collect();
        lindblad_evolve(&pure_state(&psi0), &h, &ch, &times, &MasterConfig::default(), |_, r| {
            assert!((r.trace() - C64::new(1.0, 0.0)).norm() < 1e-8);
            assert!(r.clone().symmetric_eigenvalues().min() > -1e-8);
        })
        .unwrap();
    }

    #[test]
    fn unitary_case_matches_dense_exponential() {
        let b = FockBasis::bosons(3, 2).unwrap();
        let h = bose_hubbard(&b, &LatticeSpec::new(3, 1.0, 0.7).unwrap()).unwrap();
        let psi0 = b.unit_vector(0);
        let t = 2.5;
        let last = lindblad_evolve(&pure_state(&psi0), &h, &[], &[t], &MasterConfig::default(), |_, _| {}).unwrap();
        let u = (h.to_dense() * C64::new(0.0, -t)).exp();
        let expect = &u * pure_state(&psi0) * u.adjoint();
        assert!((last - expect).camax() < 1e-8);
    }

    #[test]
    fn rejects_bad_inputs() {
        let b = FockBasis::bosons(3, 2).unwrap();
        let h = bose_hubbard(&b, &LatticeSpec::new(3, 1.0, 0.7).unwrap()).unwrap();
        let bad = DMatrix::<C64>::identity(b.dim(), b.dim());
        assert!(lindblad_evolve(&bad, &h, &[], &[1.0], &MasterConfig::default(), |_, _| {}).is_err());
        let small = MasterConfig { cap: 3, ..Default::default() };
        let rho = pure_state(&b.unit_vector(0));
        assert!(matches!(
            lindblad_evolve(&rho, &h, &[], &[1.0], &small, |_, _| {}),
            Err(Error::DimensionCap { dim: 6, cap: 3 })
        ));
    }
}
