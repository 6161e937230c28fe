//! Measuring the bond operator: jumps leave the state untouched and the
//! no-photon evolution squeezes the kinetic energy while densities spread.

use backaction::fock::FockBasis;
use backaction::model::{effective_hamiltonian, hubbard, kinetic_bilinear, LatticeSpec};
use backaction::observables::{ObservableSet, Recorder};
use backaction::probe::{build_channels, Coupling, Geometry, Probe};
use backaction::trajectory::{run_trajectory, EngineConfig, JumpMode};
use backaction::C64;

fn main() -> backaction::Result<()> {
    let b = FockBasis::bosons(4, 2)?;
    let lat = LatticeSpec::new(4, 1.0, 0.0)?.periodic();
    let bonds = lat.bonds().into_iter().map(|(i, j)| (i, j, C64::new(1.0, 0.0))).collect();
    let ch = build_channels(&b, &lat, &Probe::new(Geometry::InterSite(bonds), Coupling::Direct { gamma: 1.0 }))?;
    let heff = effective_hamiltonian(&hubbard(&b, &lat)?, &ch)?;
    let set = ObservableSet::new(&b).densities().moments("B", &kinetic_bilinear(&b, &lat)?)?;
    let psi0 = b.unit_vector(b.index_of(&[2, 0, 0, 0]).unwrap());
    let cfg = EngineConfig { t_final: 5.0, sample_interval: 0.5, mode: JumpMode::NoPhoton, ..EngineConfig::default() };
    let mut rec = Recorder::new(&set, "0");
    run_trajectory(&psi0, &heff, &ch, &cfg, 0, &mut rec)?;
    let rec = rec.finish();
    println!("{}", rec.columns.join(" "));
    for (t, row) in rec.times.iter().zip(&rec.rows) {
        println!("t = {t:4.1}  {}", row.iter().map(|x| format!("{x:7.4}")).collect::<Vec<_>>().join(" "));
    }
    Ok(())
}
