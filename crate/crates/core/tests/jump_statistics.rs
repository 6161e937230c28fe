//! Photocount statistics of a single atom on two sites with only the left
//! site lit and no tunneling, where every quantity is known in closed form.

use backaction::fock::FockBasis;
use backaction::model::{effective_hamiltonian, hubbard, LatticeSpec};
use backaction::probe::{build_channels, Coupling, Geometry, JumpChannel, Probe};
use backaction::trajectory::{run_ensemble, Discard, EngineConfig};
use backaction::C64;

const M: usize = 2000;

fn setup(gamma: f64) -> (FockBasis, backaction::fock::SparseOperator, Vec<JumpChannel>) {
    let b = FockBasis::bosons(2, 1).unwrap();
    let lat = LatticeSpec::new(2, 0.0, 0.0).unwrap();
    let ch = build_channels(&b, &lat, &Probe::new(Geometry::OddSites, Coupling::Direct { gamma })).unwrap();
    let heff = effective_hamiltonian(&hubbard(&b, &lat).unwrap(), &ch).unwrap();
    (b, heff, ch)
}

#[test]
fn counts_from_a_lit_atom_are_poissonian() {
    let gamma = 0.5;
    let t = 4.0;
    let (b, heff, ch) = setup(gamma);
    let psi = b.unit_vector(b.index_of(&[1, 0]).unwrap());
    let cfg = EngineConfig { t_final: t, sample_interval: t, seed: 12, ..EngineConfig::default() };
    let runs = run_ensemble(M, &psi, &heff, &ch, &cfg, None, |_| Discard).unwrap();

    let rate = 2.0 * gamma;
    let counts: Vec<f64> = runs.iter().map(|(o, _)| o.jumps.len() as f64).collect();
    let mean = counts.iter().sum::<f64>() / M as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (M - 1) as f64;
    let expected = rate * t;
    assert!((mean - expected).abs() < 4.0 * (expected / M as f64).sqrt(), "mean {mean} vs {expected}");
    assert!((var / expected - 1.0).abs() < 0.15, "variance {var} vs {expected}");

    let first: Vec<f64> = runs.iter().filter_map(|(o, _)| o.jumps.first().map(|j| j.t)).collect();
    let censored = M - first.len();
    let p_none = (-rate * t).exp();
    assert!((censored as f64 / M as f64 - p_none).abs() < 4.0 * (p_none * (1.0 - p_none) / M as f64).sqrt());
    // the first waiting time has CDF 1 - exp(-rate t)
    let half = first.iter().filter(|&&x| x < std::f64::consts::LN_2 / rate).count() as f64 / M as f64;
    assert!((half - 0.5).abs() < 4.0 * (0.25 / M as f64).sqrt(), "median fraction {half}");
}

#[test]
fn superposition_collapses_with_the_born_weights() {
    let gamma = 2.0;
    let (b, heff, ch) = setup(gamma);
    let (l, r) = (b.index_of(&[1, 0]).unwrap(), b.index_of(&[0, 1]).unwrap());
    let p_left: f64 = 0.3;
    let mut psi = vec![C64::new(0.0, 0.0); 2];
    psi[l] = C64::new(p_left.sqrt(), 0.0);
    psi[r] = C64::new(0.0, (1.0 - p_left).sqrt());
    let cfg = EngineConfig { t_final: 10.0, sample_interval: 10.0, seed: 4, ..EngineConfig::default() };
    let runs = run_ensemble(M, &psi, &heff, &ch, &cfg, None, |_| Discard).unwrap();
    let mut jumped = 0;
    for (o, _) in &runs {
        let left = o.final_state[l].norm_sqr();
        if o.jumps.is_empty() {
            assert!(left < 1e-12, "a dark trajectory must end on the unlit site");
        } else {
            jumped += 1;
            assert!((left - 1.0).abs() < 1e-12);
        }
    }
    // after t = 10 the chance that a left-collapsed run has no click yet is exp(-40)
    let frac = jumped as f64 / M as f64;
    assert!((frac - p_left).abs() < 4.0 * (p_left * (1.0 - p_left) / M as f64).sqrt(), "collapse fraction {frac}");
}
