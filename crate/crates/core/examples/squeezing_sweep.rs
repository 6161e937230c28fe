//! Variance of the alternating-probe observable in the no-photon steady
//! state of a Mott insulator, against the perturbative formula.

use backaction::fock::FockBasis;
use backaction::model::{effective_hamiltonian, hubbard, LatticeSpec};
use backaction::observables::variance;
use backaction::probe::{build_channels, Coupling, Geometry, Probe};
use backaction::reference::{mott_state, nojump_steady_state, sigma2_delta_n};

fn main() -> backaction::Result<()> {
    let b = FockBasis::bosons(4, 4)?;
    let psi0 = mott_state(&b)?;
    println!("    U  gamma   numeric   formula");
    for u in [5.0, 10.0, 20.0] {
        let lat = LatticeSpec::new(4, 1.0, u)?.periodic();
        let h0 = hubbard(&b, &lat)?;
        for gamma in [5.0, 10.0, 20.0] {
            let ch = build_channels(&b, &lat, &Probe::new(Geometry::Alternating, Coupling::Direct { gamma }))?;
            let (_, v) = nojump_steady_state(&effective_hamiltonian(&h0, &ch)?, &psi0)?;
            let numeric = variance(ch[0].measured(), &v);
            println!("{u:5.0} {gamma:6.0} {numeric:9.5} {:9.5}", sigma2_delta_n(1.0, u, gamma, 4, 1)?);
        }
    }
    Ok(())
}
