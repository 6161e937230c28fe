//! Closed-form predictions checked in the regimes where they are exact or
//! nearly so.

use backaction::fock::FockBasis;
use backaction::model::{effective_hamiltonian, hubbard, LatticeSpec};
use backaction::observables::{ModePartition, ObservableSet, Recorder, RunRecord};
use backaction::probe::{build_channels, build_d, Coupling, Geometry, JumpChannel, Probe};
use backaction::reference::{pair_correlation_law, perturbed_mott_state, two_mode_coherent_state, z0_between_jumps};
use backaction::linalg::norm;
use backaction::trajectory::{run_trajectory, EngineConfig, JumpMode};
use backaction::C64;

fn no_photon(t_final: f64, sample_interval: f64) -> EngineConfig {
    EngineConfig { t_final, sample_interval, mode: JumpMode::NoPhoton, dt_max: 0.5, ..EngineConfig::default() }
}

fn record(psi0: &[C64], basis: &FockBasis, lattice: &LatticeSpec, ch: &[JumpChannel], cfg: &EngineConfig, set: &ObservableSet) -> RunRecord {
    let heff = effective_hamiltonian(&hubbard(basis, lattice).unwrap(), ch).unwrap();
    let mut rec = Recorder::new(set, "0");
    run_trajectory(psi0, &heff, ch, cfg, 0, &mut rec).unwrap();
    rec.finish()
}

#[test]
fn two_hard_core_atoms_follow_the_sech2_law() {
    let b = FockBasis::fermions(4, 2, 0).unwrap();
    let lat = LatticeSpec::new(4, 1.0, 0.0).unwrap();
    let gamma = 100.0;
    let profile = [0.0, -1.0, 1.0, 0.0].map(|x| C64::new(x, 0.0)).to_vec();
    let ch = build_channels(&b, &lat, &Probe::new(Geometry::CustomDiagonal(profile), Coupling::Direct { gamma })).unwrap();
    let psi0 = b.unit_vector(b.index_of(&[0, 1, 1, 0, 0, 0, 0, 0]).unwrap());
    let set = ObservableSet::new(&b).correlation("ends", &[0], &[3]).unwrap();
    let rec = record(&psi0, &b, &lat, &ch, &no_photon(2.0 * gamma, 0.5), &set);
    for (t, c) in rec.times.iter().zip(rec.column("corr_ends").unwrap()) {
        assert!((c - pair_correlation_law(*t, 1.0, gamma)).abs() < 1e-3, "t = {t}: {c}");
    }
    // the pair ends up split across the outer sites
    assert!((rec.column("corr_ends").unwrap().last().unwrap() - 0.25).abs() < 1e-3);
}

#[test]
fn weak_measurement_imbalance_matches_the_linearized_solution() {
    let (n, gamma, j) = (20, 0.001, 1.0);
    let b = FockBasis::bosons(2, n).unwrap();
    let lat = LatticeSpec::new(2, j, 0.0).unwrap();
    let ch = build_channels(&b, &lat, &Probe::new(Geometry::OddSites, Coupling::Direct { gamma })).unwrap();
    let z00 = 0.1;
    let psi0 = two_mode_coherent_state(&b, z00, 0.3).unwrap();
    let set = ObservableSet::new(&b).imbalance(&ModePartition::odd_even(2).unwrap()).unwrap();
    let rec = record(&psi0, &b, &lat, &ch, &no_photon(5.0, 0.05), &set);
    let z = rec.column("z").unwrap();

    // least-squares fit of the single free constant c(0)
    let basis: Vec<f64> = rec.times.iter().map(|&t| z0_between_jumps(t, 1.0, 0.0, n, gamma, j)).collect();
    let offset: Vec<f64> = rec.times.iter().map(|&t| z0_between_jumps(t, 0.0, z00, n, gamma, j)).collect();
    let num: f64 = basis.iter().zip(&z).zip(&offset).map(|((u, y), o)| u * (y - o)).sum();
    let c0 = num / basis.iter().map(|u| u * u).sum::<f64>();
    for (k, &t) in rec.times.iter().enumerate() {
        let model = z0_between_jumps(t, c0, z00, n, gamma, j);
        assert!((z[k] - model).abs() < 0.02, "t = {t}: z = {} vs {model} (c0 = {c0})", z[k]);
    }
}

#[test]
fn alternating_probe_doubles_the_excitation_weight_per_jump() {
    let b = FockBasis::bosons(6, 6).unwrap();
    let lat = LatticeSpec::new(6, 1.0, 20.0).unwrap();
    let psi = perturbed_mott_state(&b, &lat, 20.0, 0.0).unwrap();
    let d = build_d(&b, &Geometry::Alternating).unwrap();
    let mut v = d.apply(&psi);
    for m in 1..5 {
        let next = d.apply(&v);
        let ratio = norm(&next) / norm(&v);
        assert!((ratio - 2.0).abs() < 1e-12, "jump {m}: ratio {ratio}");
        v = next;
    }
}
