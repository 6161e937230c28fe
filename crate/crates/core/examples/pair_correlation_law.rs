//! Correlated tunneling of a pair out of the lit middle sites, compared
//! with the closed-form correlation growth.

use backaction::fock::FockBasis;
use backaction::model::{effective_hamiltonian, hubbard, LatticeSpec};
use backaction::observables::{ObservableSet, Recorder};
use backaction::probe::{build_channels, Coupling, Geometry, Probe};
use backaction::reference::pair_correlation_law;
use backaction::trajectory::{run_trajectory, EngineConfig, JumpMode};
use backaction::C64;

fn main() -> backaction::Result<()> {
    let gamma = 100.0;
    let profile: Vec<C64> = [0.0, -1.0, 1.0, 0.0].iter().map(|&x| C64::new(x, 0.0)).collect();
    let cfg = EngineConfig { t_final: 100.0, sample_interval: 10.0, mode: JumpMode::NoPhoton, dt_max: 0.5, ..EngineConfig::default() };
    let cases = [
        ("hard-core pair", FockBasis::fermions(4, 2, 0)?, vec![0, 1, 1, 0, 0, 0, 0, 0]),
        ("boson pair", FockBasis::bosons(4, 2)?, vec![0, 1, 1, 0]),
        ("four bosons", FockBasis::bosons(4, 4)?, vec![0, 2, 2, 0]),
    ];
    for (name, b, occ) in cases {
        let lat = LatticeSpec::new(4, 1.0, 0.0)?;
        let ch = build_channels(&b, &lat, &Probe::new(Geometry::CustomDiagonal(profile.clone()), Coupling::Direct { gamma }))?;
        let heff = effective_hamiltonian(&hubbard(&b, &lat)?, &ch)?;
        let psi0 = b.unit_vector(b.index_of(&occ).unwrap());
        let set = ObservableSet::new(&b).correlation("ends", &[0], &[3])?;
        let mut rec = Recorder::new(&set, "0");
        run_trajectory(&psi0, &heff, &ch, &cfg, 0, &mut rec)?;
        let rec = rec.finish();
        println!("{name}");
        for (t, c) in rec.times.iter().zip(rec.column("corr_ends").unwrap()) {
            println!("  t = {t:5.0}  corr = {c:.4}  law = {:.4}", pair_correlation_law(*t, 1.0, gamma));
        }
    }
    Ok(())
}
