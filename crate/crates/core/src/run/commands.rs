use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;

use super::artifacts::{read_rho, read_series, write_jumps, write_rho, write_series, Manifest, SCHEMA_VERSION};
use super::config::{ModeName, RunConfig, Source};
use super::RunError;
use crate::error::Error;
use crate::model::effective_hamiltonian;
use crate::observables::{aggregate, column_stats, ColumnStats, Recorder, RunRecord};
use crate::trajectory::{lindblad_evolve, pure_state, run_ensemble, trace_distance, MasterConfig, Tolerances};
use crate::C64;

fn create_dir(dir: &Path) -> Result<(), RunError> {
    std::fs::create_dir_all(dir).map_err(|e| RunError::Io(dir.to_path_buf(), e))
}

fn write_text(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|e| RunError::Io(path.to_path_buf(), e))
}

fn load(config: &Path) -> Result<(Source, RunConfig), RunError> {
    let source = Source::read(config)?;
    let cfg = RunConfig::parse(&source)?;
    Ok((source, cfg))
}

/// Runs the configured ensemble and writes its artifact directory, which
/// is returned. `out` overrides the configured directory.
pub fn simulate(config: &Path, out: Option<&Path>, workers: Option<usize>) -> Result<PathBuf, RunError> {
    let (source, cfg) = load(config)?;
    let p = cfg.prepare(&source, None)?;
    let dir = out.map_or_else(|| cfg.output.directory.clone(), Path::to_path_buf);
    let h_eff = effective_hamiltonian(&p.h0, &p.channels)?;

    let start = Instant::now();
    let results = run_ensemble(cfg.engine.n_traj, &p.psi0, &h_eff, &p.channels, &p.engine, workers, |k| {
        Recorder::new(&p.observables, k.to_string())
    })?;
    let wall_seconds = start.elapsed().as_secs_f64();

    let mut finals = Vec::with_capacity(results.len());
    let records: Vec<RunRecord> = results
        .into_iter()
        .map(|(outcome, rec)| {
            finals.push(outcome.final_state);
            rec.finish()
        })
        .collect();
    let (stats, columns) = aggregate(&records)?;
    let times = records[0].times.clone();
    let table = |id: &str, pick: fn(&ColumnStats) -> &Vec<f64>| RunRecord {
        traj_id: id.into(),
        columns: columns.clone(),
        times: times.clone(),
        rows: (0..times.len()).map(|i| stats.iter().map(|s| pick(s)[i]).collect()).collect(),
        jumps: vec![],
    };

    create_dir(&dir)?;
    write_text(&dir.join("config.toml"), &cfg.relocated(&source, &dir)?.to_toml())?;
    write_series(&dir.join("aggregate.csv"), &table("mean", |s| &s.mean))?;
    write_series(&dir.join("stderr.csv"), &table("stderr", |s| &s.stderr))?;
    write_jumps(&dir.join("jumps.csv"), records.iter().enumerate().map(|(k, r)| (k, r.jumps.as_slice())))?;
    if cfg.output.trajectories {
        let tdir = dir.join("trajectories");
        create_dir(&tdir)?;
        for (k, r) in records.iter().enumerate() {
            write_series(&tdir.join(format!("traj_{k:05}.csv")), r)?;
        }
    }
    if p.basis.dim() <= cfg.model.master_cap {
        let d = p.basis.dim();
        let mut rho = DMatrix::<C64>::zeros(d, d);
        for psi in &finals {
            rho += pure_state(psi);
        }
        write_rho(&dir.join("rho_final.csv"), &(rho / C64::new(finals.len() as f64, 0.0)))?;
    }
    Manifest {
        config_hash: cfg.hash(),
        seed: cfg.engine.seed,
        n_traj: cfg.engine.n_traj,
        schema_version: SCHEMA_VERSION,
        jump_counts: records.iter().map(|r| r.jumps.len()).collect(),
        wall_seconds,
        kind: "simulate".into(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        dimension: p.basis.dim(),
        columns,
    }
    .write(&dir)?;
    Ok(dir)
}

/// Integrates the master equation for the same config and writes
/// `master.csv` with `traj_id = master`.
pub fn master(config: &Path, out: Option<&Path>) -> Result<PathBuf, RunError> {
    let (source, cfg) = load(config)?;
    if cfg.engine.mode == ModeName::NoPhoton {
        return Err(RunError::Config(format!(
            "{}:{}: [engine] mode: the master equation has no no-photon branch",
            source.path.display(),
            source.line_of("engine", "mode")
        )));
    }
    let p = cfg.prepare(&source, None)?;
    let dim = p.basis.dim();
    if dim > cfg.model.master_cap {
        return Err(Error::DimensionCap { dim: dim as u128, cap: cfg.model.master_cap }.into());
    }
    let dir = out.map_or_else(|| cfg.output.directory.clone(), Path::to_path_buf);
    let e = &cfg.engine;
    let mcfg = MasterConfig { tol: Tolerances { rtol: e.rtol, atol: e.atol, dt_max: e.dt_max }, cap: cfg.model.master_cap };
    let times = p.engine.sample_times();
    let mut rows = Vec::with_capacity(times.len());
    let start = Instant::now();
    let last = lindblad_evolve(&pure_state(&p.psi0), &p.h0, &p.channels, &times, &mcfg, |_, rho| {
        rows.push(p.observables.evaluate_rho(rho))
    })?;
    let wall_seconds = start.elapsed().as_secs_f64();
    let columns = p.observables.columns();
    let record = RunRecord { traj_id: "master".into(), columns: columns.clone(), times, rows, jumps: vec![] };

    create_dir(&dir)?;
    write_text(&dir.join("config.toml"), &cfg.relocated(&source, &dir)?.to_toml())?;
    write_series(&dir.join("master.csv"), &record)?;
    write_rho(&dir.join("rho_final.csv"), &last)?;
    Manifest {
        config_hash: cfg.hash(),
        seed: e.seed,
        n_traj: 0,
        schema_version: SCHEMA_VERSION,
        jump_counts: vec![],
        wall_seconds,
        kind: "master".into(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        dimension: dim,
        columns,
    }
    .write(&dir)?;
    Ok(dir)
}

/// Allowed maximum absolute deviation, per column with a default.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerance {
    pub default: f64,
    pub columns: BTreeMap<String, f64>,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { default: 1e-10, columns: BTreeMap::new() }
    }
}

impl Tolerance {
    /// `0.05`, or `default=0.05,n_0=0.01,...`.
    pub fn parse(spec: &str) -> Result<Self, RunError> {
        let mut tol = Tolerance::default();
        let value = |s: &str| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| *v >= 0.0)
                .ok_or_else(|| RunError::Config(format!("tolerance '{s}' is not a non-negative number")))
        };
        for part in spec.split(',').filter(|s| !s.trim().is_empty()) {
            match part.split_once('=') {
                None => tol.default = value(part)?,
                Some((k, v)) if k.trim() == "default" => tol.default = value(v)?,
                Some((k, v)) => {
                    tol.columns.insert(k.trim().to_string(), value(v)?);
                }
            }
        }
        Ok(tol)
    }

    pub fn for_column(&self, name: &str) -> f64 {
        self.columns.get(name).copied().unwrap_or(self.default)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ColumnReport {
    pub max_abs: f64,
    pub mean_abs: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub a: PathBuf,
    pub b: PathBuf,
    pub columns: BTreeMap<String, ColumnReport>,
    /// Trace distance between the stored final density matrices.
    pub trace_distance: Option<f64>,
    pub pass: bool,
}

fn primary_series(dir: &Path) -> Result<RunRecord, RunError> {
    for name in ["aggregate.csv", "master.csv"] {
        let path = dir.join(name);
        if path.exists() {
            return read_series(&path);
        }
    }
    Err(RunError::Artifact(format!("{}: no aggregate.csv or master.csv", dir.display())))
}

/// Column-wise deviations between the ensemble means (or master series)
/// of two artifact directories.
pub fn compare(a: &Path, b: &Path, tol: &Tolerance) -> Result<CompareReport, RunError> {
    let (ra, rb) = (primary_series(a)?, primary_series(b)?);
    if ra.columns != rb.columns {
        return Err(Error::GridMismatch(format!("columns differ: {:?} vs {:?}", ra.columns, rb.columns)).into());
    }
    let same_grid = ra.times.len() == rb.times.len()
        && ra.times.iter().zip(&rb.times).all(|(x, y)| (x - y).abs() <= 1e-9 * x.abs().max(1.0));
    if !same_grid {
        return Err(Error::GridMismatch(format!("{} vs {} sample times", ra.times.len(), rb.times.len())).into());
    }
    let mut columns = BTreeMap::new();
    for (i, name) in ra.columns.iter().enumerate() {
        let devs: Vec<f64> = ra.rows.iter().zip(&rb.rows).map(|(x, y)| (x[i] - y[i]).abs()).collect();
        let max_abs = devs.iter().copied().fold(0.0, f64::max);
        let mean_abs = devs.iter().sum::<f64>() / devs.len().max(1) as f64;
        let tolerance = tol.for_column(name);
        columns.insert(name.clone(), ColumnReport { max_abs, mean_abs, tolerance, pass: max_abs <= tolerance });
    }
    let (pa, pb) = (a.join("rho_final.csv"), b.join("rho_final.csv"));
    let trace_distance = if pa.exists() && pb.exists() {
        let (x, y) = (read_rho(&pa)?, read_rho(&pb)?);
        (x.shape() == y.shape()).then(|| trace_distance(&x, &y))
    } else {
        None
    };
    let pass = columns.values().all(|c| c.pass);
    Ok(CompareReport { a: a.to_path_buf(), b: b.to_path_buf(), columns, trace_distance, pass })
}

/// Mean and standard error of one observable over the trajectories of a
/// simulate directory, or the master series itself.
pub fn analyze(dir: &Path, observable: &str) -> Result<ColumnStats, RunError> {
    let tdir = dir.join("trajectories");
    let missing = |columns: &[String]| {
        RunError::Config(format!("no observable '{observable}' in {}; available: {}", dir.display(), columns.join(", ")))
    };
    if !tdir.is_dir() {
        // ensemble runs without per-trajectory files keep their error bars in stderr.csv;
        // a master series has none
        let series = primary_series(dir)?;
        let mean = series.column(observable).ok_or_else(|| missing(&series.columns))?;
        let spread = dir.join("stderr.csv");
        let stderr = if spread.exists() && dir.join("aggregate.csv").exists() {
            read_series(&spread)?.column(observable).ok_or_else(|| missing(&series.columns))?
        } else {
            vec![0.0; mean.len()]
        };
        return Ok(ColumnStats { times: series.times, mean, stderr });
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&tdir)
        .map_err(|e| RunError::Io(tdir.clone(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    let records = paths.iter().map(|p| read_series(p)).collect::<Result<Vec<_>, _>>()?;
    let first = records.first().ok_or_else(|| RunError::Artifact(format!("{}: no trajectories", tdir.display())))?;
    if !first.columns.iter().any(|c| c == observable) {
        return Err(missing(&first.columns));
    }
    Ok(column_stats(&records, observable)?)
}
