use nalgebra::DMatrix;

use super::partition::ModePartition;
use super::state::{entanglement_entropy, reduced_entropy, variance, zone_counts};
use crate::error::{Error, Result};
use crate::fock::{FockBasis, SparseOperator};
use crate::trajectory::{JumpEvent, Sampler};
use crate::C64;

#[derive(Clone, Debug)]
enum Quantity {
    Densities { occ: Vec<Vec<f64>> },
    Distribution { mode: usize, counts: Vec<usize>, max: usize },
    Zone { name: String, counts: Vec<usize> },
    Moments { name: String, op: SparseOperator, op2: SparseOperator },
    Correlation { name: String, a: Vec<usize>, b: Vec<usize> },
    Entropy { name: String, zone: Vec<usize> },
    Imbalance { n1: Vec<usize>, n2: Vec<usize>, total: f64 },
}

/// A list of observables evaluated together on one basis, producing one
/// row of named real columns per snapshot.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    basis: FockBasis,
    items: Vec<Quantity>,
}

fn check_zone(basis: &FockBasis, zone: &[usize]) -> Result<()> {
    if zone.is_empty() {
        return Err(Error::InvalidParameter("empty zone".into()));
    }
    zone.iter().try_for_each(|&j| basis.check_site(j))
}

impl ObservableSet {
    pub fn new(basis: &FockBasis) -> Self {
        Self { basis: basis.clone(), items: Vec::new() }
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    /// Columns `n_0 .. n_{L-1}`.
    pub fn densities(mut self) -> Self {
        let b = &self.basis;
        let occ = (0..b.sites()).map(|j| (0..b.dim()).map(|k| b.site_occupation(k, j) as f64).collect()).collect();
        self.items.push(Quantity::Densities { occ });
        self
    }

    /// Columns `p{mode}_0 .. p{mode}_N` holding `p(N_mode = m)`.
    pub fn distribution(mut self, partition: &ModePartition, mode: usize) -> Result<Self> {
        if partition.sites() != self.basis.sites() || mode >= partition.modes() {
            return Err(Error::InvalidParameter("partition does not match the lattice".into()));
        }
        let counts = zone_counts(&self.basis, &partition.zone(mode))?;
        let max = self.basis.particles().total();
        self.items.push(Quantity::Distribution { mode, counts, max });
        Ok(self)
    }

    /// Columns `mean_{name}` and `var_{name}` of the particle number on a zone.
    pub fn zone_number(mut self, name: &str, zone: &[usize]) -> Result<Self> {
        check_zone(&self.basis, zone)?;
        let counts = zone_counts(&self.basis, zone)?;
        self.items.push(Quantity::Zone { name: name.into(), counts });
        Ok(self)
    }

    /// Mean and variance of an operator; non-Hermitian operators get
    /// separate real and imaginary mean columns.
    pub fn moments(mut self, name: &str, op: &SparseOperator) -> Result<Self> {
        if op.tag() != self.basis.tag() {
            return Err(Error::BasisMismatch { left: self.basis.tag(), right: op.tag() });
        }
        let op2 = op.adjoint().matmul(op)?;
        self.items.push(Quantity::Moments { name: name.into(), op: op.clone(), op2 });
        Ok(self)
    }

    /// Column `corr_{name}` with `<dN_A dN_B>`.
    pub fn correlation(mut self, name: &str, a: &[usize], b: &[usize]) -> Result<Self> {
        check_zone(&self.basis, a)?;
        check_zone(&self.basis, b)?;
        if let Some(&j) = a.iter().find(|j| b.contains(j)) {
            return Err(Error::OverlappingZones(j));
        }
        self.items.push(Quantity::Correlation { name: name.into(), a: a.to_vec(), b: b.to_vec() });
        Ok(self)
    }

    /// Column `entropy_{name}` with the entanglement entropy of `zone`.
    pub fn entropy(mut self, name: &str, zone: &[usize]) -> Result<Self> {
        check_zone(&self.basis, zone)?;
        self.items.push(Quantity::Entropy { name: name.into(), zone: zone.to_vec() });
        Ok(self)
    }

    /// Column `z`.
    pub fn imbalance(mut self, partition: &ModePartition) -> Result<Self> {
        if partition.modes() != 2 || partition.sites() != self.basis.sites() {
            return Err(Error::InvalidParameter("imbalance needs a two-mode partition of the lattice".into()));
        }
        let n1 = zone_counts(&self.basis, &partition.zone(0))?;
        let n2 = zone_counts(&self.basis, &partition.zone(1))?;
        let total = self.basis.particles().total() as f64;
        self.items.push(Quantity::Imbalance { n1, n2, total });
        Ok(self)
    }

    pub fn columns(&self) -> Vec<String> {
        let mut out = Vec::new();
        for q in &self.items {
            match q {
                Quantity::Densities { occ } => out.extend((0..occ.len()).map(|j| format!("n_{j}"))),
                Quantity::Distribution { mode, max, .. } => out.extend((0..=*max).map(|m| format!("p{mode}_{m}"))),
                Quantity::Zone { name, .. } => {
                    out.push(format!("mean_{name}"));
                    out.push(format!("var_{name}"));
                }
                Quantity::Moments { name, op, .. } => {
                    if op.hermitian() {
                        out.push(format!("mean_{name}"));
                    } else {
                        out.push(format!("mean_{name}_re"));
                        out.push(format!("mean_{name}_im"));
                    }
                    out.push(format!("var_{name}"));
                }
                Quantity::Correlation { name, .. } => out.push(format!("corr_{name}")),
                Quantity::Entropy { name, .. } => out.push(format!("entropy_{name}")),
                Quantity::Imbalance { .. } => out.push("z".into()),
            }
        }
        out
    }

    /// One row for a normalized pure state.
    pub fn evaluate(&self, psi: &[C64]) -> Vec<f64> {
        let w: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
        let mut out = Vec::new();
        for q in &self.items {
            match q {
                Quantity::Moments { op, .. } => {
                    let mean = op.expectation(psi);
                    if op.hermitian() {
                        out.push(mean.re);
                    } else {
                        out.push(mean.re);
                        out.push(mean.im);
                    }
                    out.push(variance(op, psi));
                }
                Quantity::Entropy { zone, .. } => {
                    out.push(entanglement_entropy(&self.basis, psi, zone).expect("zone validated at construction"))
                }
                _ => self.diagonal(q, &w, &mut out),
            }
        }
        out
    }

    /// One row for a density matrix. Variances are those of `rho` itself,
    /// and entropies are reduced-state entropies.
    pub fn evaluate_rho(&self, rho: &DMatrix<C64>) -> Vec<f64> {
        let w: Vec<f64> = (0..rho.nrows()).map(|k| rho[(k, k)].re).collect();
        let mut out = Vec::new();
        let trace_with = |op: &SparseOperator| -> C64 { op.entries().map(|(r, c, v)| v * rho[(c, r)]).sum() };
        for q in &self.items {
            match q {
                Quantity::Moments { op, op2, .. } => {
                    let mean = trace_with(op);
                    if op.hermitian() {
                        out.push(mean.re);
                    } else {
                        out.push(mean.re);
                        out.push(mean.im);
                    }
                    out.push(trace_with(op2).re - mean.norm_sqr());
                }
                Quantity::Entropy { zone, .. } => {
                    out.push(reduced_entropy(&self.basis, rho, zone).expect("zone validated at construction"))
                }
                _ => self.diagonal(q, &w, &mut out),
            }
        }
        out
    }

    fn diagonal(&self, q: &Quantity, w: &[f64], out: &mut Vec<f64>) {
        match q {
            Quantity::Densities { occ } => {
                out.extend(occ.iter().map(|o| o.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()))
            }
            Quantity::Distribution { counts, max, .. } => {
                let mut p = vec![0.0; max + 1];
                for (k, &c) in counts.iter().enumerate() {
                    p[c] += w[k];
                }
                out.extend(p);
            }
            Quantity::Zone { counts, .. } => {
                let (m1, m2) = moments(counts, w);
                out.push(m1);
                out.push(m2 - m1 * m1);
            }
            Quantity::Correlation { a, b, .. } => {
                let ca = zone_counts(&self.basis, a).expect("validated");
                let cb = zone_counts(&self.basis, b).expect("validated");
                let (ma, _) = moments(&ca, w);
                let (mb, _) = moments(&cb, w);
                let mab: f64 = (0..w.len()).map(|k| w[k] * (ca[k] * cb[k]) as f64).sum();
                out.push(mab - ma * mb);
            }
            Quantity::Imbalance { n1, n2, total } => {
                let z: f64 = (0..w.len()).map(|k| w[k] * (n1[k] as f64 - n2[k] as f64)).sum();
                out.push(z / total);
            }
            Quantity::Moments { .. } | Quantity::Entropy { .. } => unreachable!(),
        }
    }
}

fn moments(counts: &[usize], w: &[f64]) -> (f64, f64) {
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (k, &c) in counts.iter().enumerate() {
        let c = c as f64;
        m1 += w[k] * c;
        m2 += w[k] * c * c;
    }
    (m1, m2)
}

/// Time series of one trajectory (or of the master equation).
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub traj_id: String,
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub jumps: Vec<JumpEvent>,
}

impl RunRecord {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Largest deviation from 1 of any `p*` distribution at any snapshot.
    pub fn distribution_defect(&self) -> f64 {
        let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
        for (i, c) in self.columns.iter().enumerate() {
            if let Some(rest) = c.strip_prefix('p') {
                if let Some((mode, _)) = rest.split_once('_') {
                    match groups.iter_mut().find(|g| g.0 == mode) {
                        Some(g) => g.1.push(i),
                        None => groups.push((mode.to_string(), vec![i])),
                    }
                }
            }
        }
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            for (_, idx) in &groups {
                let s: f64 = idx.iter().map(|&i| row[i]).sum();
                worst = worst.max((s - 1.0).abs());
            }
        }
        worst
    }
}

/// Sampler that evaluates an [`ObservableSet`] at every sample time and
/// logs jumps.
pub struct Recorder<'a> {
    set: &'a ObservableSet,
    traj_id: String,
    times: Vec<f64>,
    rows: Vec<Vec<f64>>,
    jumps: Vec<JumpEvent>,
}

impl<'a> Recorder<'a> {
    pub fn new(set: &'a ObservableSet, traj_id: impl Into<String>) -> Self {
        Self { set, traj_id: traj_id.into(), times: Vec::new(), rows: Vec::new(), jumps: Vec::new() }
    }

    pub fn finish(self) -> RunRecord {
        RunRecord { traj_id: self.traj_id, columns: self.set.columns(), times: self.times, rows: self.rows, jumps: self.jumps }
    }
}

impl Sampler for Recorder<'_> {
    fn sample(&mut self, t: f64, psi: &[C64]) {
        self.times.push(t);
        self.rows.push(self.set.evaluate(psi));
    }

    fn on_jump(&mut self, event: &JumpEvent, _before: &[C64], _after: &[C64]) {
        self.jumps.push(event.clone());
    }
}

/// Mean and standard error across trajectories on a common grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnStats {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    /// `NaN` when only one trajectory is given.
    pub stderr: Vec<f64>,
}

fn check_grids(records: &[RunRecord]) -> Result<()> {
    let first = records.first().ok_or_else(|| Error::InvalidParameter("no trajectories".into()))?;
    for r in records {
        if r.times != first.times {
            return Err(Error::GridMismatch(format!("{} and {} have different time grids", first.traj_id, r.traj_id)));
        }
        if r.columns != first.columns {
            return Err(Error::GridMismatch(format!("{} and {} have different columns", first.traj_id, r.traj_id)));
        }
    }
    Ok(())
}

pub fn column_stats(records: &[RunRecord], column: &str) -> Result<ColumnStats> {
    check_grids(records)?;
    let series: Vec<Vec<f64>> = records
        .iter()
        .map(|r| r.column(column).ok_or_else(|| Error::InvalidParameter(format!("no column '{column}'"))))
        .collect::<Result<_>>()?;
    let m = series.len() as f64;
    let n = records[0].times.len();
    let mut mean = vec![0.0; n];
    let mut stderr = vec![f64::NAN; n];
    for i in 0..n {
        mean[i] = series.iter().map(|s| s[i]).sum::<f64>() / m;
        if series.len() > 1 {
            let var = series.iter().map(|s| (s[i] - mean[i]).powi(2)).sum::<f64>() / (m - 1.0);
            stderr[i] = (var / m).sqrt();
        }
    }
    Ok(ColumnStats { times: records[0].times.clone(), mean, stderr })
}

/// Trajectory average of the per-trajectory variance recorded as
/// `var_{name}`.
pub fn traj_avg_variance(records: &[RunRecord], name: &str) -> Result<ColumnStats> {
    column_stats(records, &format!("var_{name}"))
}

/// Mean of `values` over the final `fraction` of the time window.
pub fn late_window_mean(times: &[f64], values: &[f64], fraction: f64) -> f64 {
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let cut = t1 - fraction * (t1 - t0);
    let sel: Vec<f64> = times.iter().zip(values).filter(|(t, _)| **t >= cut - 1e-12).map(|(_, v)| *v).collect();
    sel.iter().sum::<f64>() / sel.len() as f64
}

/// Long-time value of a trajectory-averaged variance: the mean over the
/// last quarter of the window.
pub fn steady_variance(stats: &ColumnStats) -> f64 {
    late_window_mean(&stats.times, &stats.mean, 0.25)
}

/// Per-column mean and standard error over an ensemble.
pub fn aggregate(records: &[RunRecord]) -> Result<(Vec<ColumnStats>, Vec<String>)> {
    check_grids(records)?;
    let cols = records[0].columns.clone();
    let stats = cols.iter().map(|c| column_stats(records, c)).collect::<Result<_>>()?;
    Ok((stats, cols))
}
