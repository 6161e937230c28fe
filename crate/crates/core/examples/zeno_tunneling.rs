//! Strong measurement with a two-valued profile: the full no-photon
//! evolution against the projected second-order Hamiltonian.

use backaction::fock::FockBasis;
use backaction::model::{effective_hamiltonian, hubbard, LatticeSpec};
use backaction::observables::{expectation, ObservableSet, Recorder, RunRecord};
use backaction::probe::{build_channels, Coupling, Geometry, JumpChannel, Probe};
use backaction::reference::zeno_hamiltonian;
use backaction::trajectory::{run_trajectory, EngineConfig, JumpMode};
use backaction::C64;

fn main() -> backaction::Result<()> {
    let b = FockBasis::bosons(5, 4)?;
    let lat = LatticeSpec::new(5, 1.0, 0.0)?;
    let gamma = 100.0;
    let coeffs: Vec<C64> = [0.0, 1.0, 0.0, 1.0, 0.0].iter().map(|&x| C64::new(x, 0.0)).collect();
    let psi0 = b.unit_vector(b.index_of(&[0, 1, 2, 1, 0]).unwrap());
    let ch = build_channels(&b, &lat, &Probe::new(Geometry::CustomDiagonal(coeffs.clone()), Coupling::Direct { gamma }))?;
    let d0 = expectation(ch[0].measured(), &psi0).re;
    let ch: Vec<JumpChannel> = ch.iter().map(|c| c.recentered(d0)).collect::<Result<_, _>>()?;
    let heff = effective_hamiltonian(&hubbard(&b, &lat)?, &ch)?;
    let hz = zeno_hamiltonian(&b, &lat, &coeffs, &psi0, gamma)?;
    println!("projected Hamiltonian: {} nonzeros", hz.nnz());

    let set = ObservableSet::new(&b).densities();
    let cfg = EngineConfig { t_final: 500.0, sample_interval: 50.0, mode: JumpMode::NoPhoton, dt_max: 0.5, ..EngineConfig::default() };
    let run = |h: &_, ch: &[JumpChannel]| -> backaction::Result<RunRecord> {
        let mut rec = Recorder::new(&set, "0");
        run_trajectory(&psi0, h, ch, &cfg, 0, &mut rec)?;
        Ok(rec.finish())
    };
    let (full, zeno) = (run(&heff, &ch)?, run(&hz, &[])?);
    for (i, t) in full.times.iter().enumerate() {
        let fmt = |r: &[f64]| r.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
        println!("t = {t:5.0}  full [{}]  zeno [{}]", fmt(&full.rows[i]), fmt(&zeno.rows[i]));
    }
    Ok(())
}
