//! Averaged trajectories converge to the master-equation state.

use nalgebra::DMatrix;

use backaction::fock::FockBasis;
use backaction::model::{effective_hamiltonian, ground_state, hubbard, LatticeSpec};
use backaction::probe::{build_channels, Coupling, Geometry, Probe};
use backaction::trajectory::{lindblad_evolve, pure_state, run_ensemble, trace_distance, Discard, EngineConfig, MasterConfig};
use backaction::C64;

fn main() -> backaction::Result<()> {
    let b = FockBasis::bosons(4, 2)?;
    let lat = LatticeSpec::new(4, 1.0, 1.0)?;
    let h0 = hubbard(&b, &lat)?;
    let ch = build_channels(&b, &lat, &Probe::new(Geometry::OddSites, Coupling::Direct { gamma: 1.0 }))?;
    let heff = effective_hamiltonian(&h0, &ch)?;
    let (_, psi0) = ground_state(&h0)?;
    let t = 2.0;
    let exact = lindblad_evolve(&pure_state(&psi0), &h0, &ch, &[t], &MasterConfig::default(), |_, _| {})?;
    let cfg = EngineConfig { t_final: t, sample_interval: t, seed: 7, ..EngineConfig::default() };
    let runs = run_ensemble(1600, &psi0, &heff, &ch, &cfg, None, |_| Discard)?;
    let mut rho = DMatrix::<C64>::zeros(b.dim(), b.dim());
    for (m, (out, _)) in runs.iter().enumerate() {
        rho += pure_state(&out.final_state);
        if (m + 1).is_power_of_two() && m >= 99 || m + 1 == runs.len() {
            let avg = &rho / C64::new((m + 1) as f64, 0.0);
            println!("M = {:5}  trace distance {:.4}", m + 1, trace_distance(&avg, &exact));
        }
    }
    Ok(())
}
