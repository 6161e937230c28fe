//! Relabelling the modes of an R-mode probe by cyclic shifts and
//! reflections keeps |D|^2 but can change D itself. Counts the distinct
//! values of D over that orbit for a generic mode occupation.

use backaction::probe::component_multiplicity;
use backaction::C64;

fn d_value(occ: &[usize]) -> C64 {
    let r = occ.len();
    occ.iter().enumerate().map(|(l, &n)| C64::from_polar(n as f64, 2.0 * std::f64::consts::PI * (l + 1) as f64 / r as f64)).sum()
}

fn main() -> backaction::Result<()> {
    for r in [2usize, 3, 4, 5, 6] {
        let occ: Vec<usize> = (0..r).map(|l| l * l + 1).collect();
        let mut values: Vec<C64> = Vec::new();
        for s in 0..r {
            let shifted: Vec<usize> = (0..r).map(|l| occ[(l + s) % r]).collect();
            let reflected: Vec<usize> = shifted.iter().rev().copied().collect();
            for w in [shifted, reflected] {
                let d = d_value(&w);
                assert!((d.norm_sqr() - d_value(&occ).norm_sqr()).abs() < 1e-9);
                if !values.iter().any(|v| (v - d).norm() < 1e-9) {
                    values.push(d);
                }
            }
        }
        println!("R = {r}: occupation {occ:?} gives {} values of D with equal |D|^2 (rule {})", values.len(), component_multiplicity(r)?);
    }
    Ok(())
}
