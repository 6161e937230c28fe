//! Paired fermions watched through the density alone or through density
//! and magnetization: weight of odd atom number in the odd-site mode.

use backaction::fock::FockBasis;
use backaction::model::{effective_hamiltonian, fermi_hubbard, ground_state, LatticeSpec};
use backaction::observables::{ModePartition, ObservableSet, Recorder};
use backaction::probe::{build_channels, Coupling, Geometry, Probe};
use backaction::trajectory::run_ensemble;
use backaction::trajectory::EngineConfig;

fn main() -> backaction::Result<()> {
    let b = FockBasis::fermions(4, 2, 2)?;
    let lat = LatticeSpec::new(4, 1.0, 10.0)?;
    let h0 = fermi_hubbard(&b, &lat)?;
    let (_, psi0) = ground_state(&h0)?;
    let set = ObservableSet::new(&b).distribution(&ModePartition::odd_even(4)?, 0)?;
    let cfg = EngineConfig { t_final: 20.0, sample_interval: 4.0, seed: 3, ..EngineConfig::default() };
    let coupling = Coupling::Direct { gamma: 0.1 };
    for (name, probe) in [("density", Probe::new(Geometry::OddSites, coupling)), ("density+magnetization", Probe::fermion_dual(Geometry::OddSites, coupling))] {
        let ch = build_channels(&b, &lat, &probe)?;
        let heff = effective_hamiltonian(&h0, &ch)?;
        let runs = run_ensemble(20, &psi0, &heff, &ch, &cfg, None, |k| Recorder::new(&set, k.to_string()))?;
        let recs: Vec<_> = runs.into_iter().map(|(_, r)| r.finish()).collect();
        println!("{name}");
        for i in 0..recs[0].times.len() {
            let odd: f64 = recs.iter().map(|r| r.column("p0_1").unwrap()[i] + r.column("p0_3").unwrap()[i]).sum::<f64>() / recs.len() as f64;
            println!("  t = {:4.1}  P(odd N_odd) = {odd:.4}", recs[0].times[i]);
        }
    }
    Ok(())
}
