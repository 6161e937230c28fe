//! Two-mode imbalance under weak measurement: a no-photon run against the
//! linearized solution, then a single stochastic trajectory.

use backaction::fock::FockBasis;
use backaction::model::{effective_hamiltonian, hubbard, LatticeSpec};
use backaction::observables::{ModePartition, ObservableSet, Recorder};
use backaction::probe::{build_channels, Coupling, Geometry, Probe};
use backaction::reference::{two_mode_coherent_state, z0_between_jumps, z0_jump_envelope};
use backaction::trajectory::{run_trajectory, EngineConfig, JumpMode};

fn main() -> backaction::Result<()> {
    let (n, gamma) = (20, 0.001);
    let b = FockBasis::bosons(2, n)?;
    let lat = LatticeSpec::new(2, 1.0, 0.0)?;
    let ch = build_channels(&b, &lat, &Probe::new(Geometry::OddSites, Coupling::Direct { gamma }))?;
    let heff = effective_hamiltonian(&hubbard(&b, &lat)?, &ch)?;
    let psi0 = two_mode_coherent_state(&b, 0.1, 0.0)?;
    let set = ObservableSet::new(&b).imbalance(&ModePartition::odd_even(2)?)?;

    let cfg = EngineConfig { t_final: 3.0, sample_interval: 0.25, mode: JumpMode::NoPhoton, ..EngineConfig::default() };
    let mut rec = Recorder::new(&set, "dark");
    run_trajectory(&psi0, &heff, &ch, &cfg, 0, &mut rec)?;
    let rec = rec.finish();
    println!("t      z(sim)    z(linearized)");
    for (t, z) in rec.times.iter().zip(rec.column("z").unwrap()) {
        println!("{t:5.2}  {z:+.5}  {:+.5}", z0_between_jumps(*t, 0.0, 0.1, n, gamma, 1.0));
    }

    let cfg = EngineConfig { t_final: 40.0, sample_interval: 5.0, seed: 1, ..EngineConfig::default() };
    let mut rec = Recorder::new(&set, "0");
    let out = run_trajectory(&psi0, &heff, &ch, &cfg, 0, &mut rec)?;
    let rec = rec.finish();
    println!("stochastic run: {} jumps", out.jumps.len());
    for (t, z) in rec.times.iter().zip(rec.column("z").unwrap()) {
        println!("{t:5.1}  z = {z:+.3}  jump envelope {:+.3}", z0_jump_envelope(*t, 0.1, n, gamma).min(1.0));
    }
    Ok(())
}
