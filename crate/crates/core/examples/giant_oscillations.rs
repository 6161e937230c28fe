//! One trajectory of six free bosons watched on the odd sites: the odd-site
//! population swings grow while its spread stays below the ground state's.

use backaction::fock::FockBasis;
use backaction::model::{effective_hamiltonian, ground_state, hubbard, LatticeSpec};
use backaction::observables::{variance, ObservableSet, Recorder};
use backaction::probe::{build_channels, Coupling, Geometry, Probe};
use backaction::trajectory::{run_trajectory, EngineConfig};

fn main() -> backaction::Result<()> {
    let b = FockBasis::bosons(6, 6)?;
    let lat = LatticeSpec::new(6, 1.0, 0.0)?;
    let h0 = hubbard(&b, &lat)?;
    let gamma = 0.01;
    let ch = build_channels(&b, &lat, &Probe::new(Geometry::OddSites, Coupling::Direct { gamma }))?;
    let heff = effective_hamiltonian(&h0, &ch)?;
    let (_, psi0) = ground_state(&h0)?;
    println!("ground state Var(N_odd) = {:.3}", variance(ch[0].measured(), &psi0));

    let set = ObservableSet::new(&b).zone_number("odd", &[0, 2, 4])?;
    let cfg = EngineConfig { t_final: 200.0, sample_interval: 10.0, seed: 5, dt_max: 0.2, ..EngineConfig::default() };
    let mut rec = Recorder::new(&set, "0");
    let out = run_trajectory(&psi0, &heff, &ch, &cfg, 0, &mut rec)?;
    let rec = rec.finish();
    println!("{} photons detected", out.jumps.len());
    let (mean, var) = (rec.column("mean_odd").unwrap(), rec.column("var_odd").unwrap());
    for (i, t) in rec.times.iter().enumerate() {
        println!("t = {t:6.1}  <N_odd> = {:.3}  Var = {:.3}", mean[i], var[i]);
    }
    Ok(())
}
