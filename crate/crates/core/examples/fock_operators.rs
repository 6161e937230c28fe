//! Build bosonic and fermionic sectors, print a few basis states and the
//! nonzero elements of a hopping operator.

use backaction::fock::{hop_op, number_op, sector_dimension, FockBasis, Particles, Spin};
use backaction::model::{hubbard, LatticeSpec};

fn main() -> backaction::Result<()> {
    let bosons = FockBasis::bosons(3, 2)?;
    println!("bosons L=3 N=2: dim {}", bosons.dim());
    for k in 0..bosons.dim() {
        println!("  {k}: {:?}", bosons.state(k));
    }
    let hop = hop_op(&bosons, 0, 1, None)?;
    for (r, c, v) in hop.entries() {
        println!("  <{:?}| b0^+ b1 |{:?}> = {:.4}", bosons.state(r), bosons.state(c), v.re);
    }

    let fermions = FockBasis::fermions(4, 2, 1)?;
    println!("fermions L=4 up=2 down=1: dim {}", fermions.dim());
    let n = number_op(&fermions, 2, Some(Spin::Up))?;
    println!("  <n_2,up> on state 0 = {}", n.expectation(&fermions.unit_vector(0)).re);

    let lat = LatticeSpec::new(4, 1.0, 4.0)?.periodic();
    let h = hubbard(&fermions, &lat)?;
    println!("  Fermi-Hubbard: {} nonzeros, hermitian defect {:.1e}", h.nnz(), h.hermitian_defect());

    for l in [6, 8, 10] {
        println!("sector size L={l} N={l}: {}", sector_dimension(l, Particles::Bosons(l)));
    }
    Ok(())
}
