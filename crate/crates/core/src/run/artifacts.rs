use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::RunError;
use crate::observables::RunRecord;
use crate::trajectory::JumpEvent;
use crate::C64;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub seed: u64,
    pub n_traj: usize,
    pub schema_version: u32,
    pub jump_counts: Vec<usize>,
    pub wall_seconds: f64,
    pub kind: String,
    pub code_version: String,
    pub dimension: usize,
    pub columns: Vec<String>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Self, RunError> {
        let path = dir.join("manifest.json");
        let text = std::fs::read_to_string(&path).map_err(|e| RunError::Io(path.clone(), e))?;
        serde_json::from_str(&text).map_err(|e| RunError::Artifact(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, dir: &Path) -> Result<(), RunError> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| RunError::Io(path, e))
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_series(path: &Path, record: &RunRecord) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["time".to_string(), "traj_id".to_string()];
    header.extend(record.columns.iter().cloned());
    w.write_record(&header)?;
    for (t, row) in record.times.iter().zip(&record.rows) {
        let mut line = vec![num(*t), record.traj_id.clone()];
        line.extend(row.iter().map(|x| num(*x)));
        w.write_record(&line)?;
    }
    w.flush().map_err(|e| RunError::Io(path.to_path_buf(), e))
}

/// Reads a `time,traj_id,...` file. All rows must share one `traj_id`.
pub fn read_series(path: &Path) -> Result<RunRecord, RunError> {
    let bad = |msg: String| RunError::Artifact(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.len() < 2 || header[0] != "time" || header[1] != "traj_id" {
        return Err(bad("header must start with time,traj_id".into()));
    }
    let mut rec = RunRecord { traj_id: String::new(), columns: header[2..].to_vec(), times: vec![], rows: vec![], jumps: vec![] };
    for (n, row) in r.records().enumerate() {
        let row = row?;
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("row {}: cannot parse '{s}'", n + 2)));
        if n == 0 {
            rec.traj_id = row[1].to_string();
        } else if row[1] != rec.traj_id {
            return Err(bad(format!("row {}: mixed traj_id '{}'", n + 2, &row[1])));
        }
        rec.times.push(parse(&row[0])?);
        rec.rows.push(row.iter().skip(2).map(parse).collect::<Result<_, _>>()?);
    }
    Ok(rec)
}

pub fn write_jumps<'a>(path: &Path, logs: impl Iterator<Item = (usize, &'a [JumpEvent])>) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["traj_id", "time", "channel", "label"])?;
    for (id, events) in logs {
        for e in events {
            w.write_record([id.to_string(), num(e.t), e.channel.to_string(), e.label.clone()])?;
        }
    }
    w.flush().map_err(|e| RunError::Io(path.to_path_buf(), e))
}

/// One row per matrix row, real and imaginary parts interleaved.
pub fn write_rho(path: &Path, rho: &DMatrix<C64>) -> Result<(), RunError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for r in 0..rho.nrows() {
        w.write_record((0..rho.ncols()).flat_map(|c| [num(rho[(r, c)].re), num(rho[(r, c)].im)]))?;
    }
    w.flush().map_err(|e| RunError::Io(path.to_path_buf(), e))
}

pub fn read_rho(path: &Path) -> Result<DMatrix<C64>, RunError> {
    let bad = |msg: String| RunError::Artifact(format!("{}: {msg}", path.display()));
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for row in r.records() {
        let vals: Vec<f64> = row?.iter().map(|s| s.parse::<f64>().map_err(|_| bad(format!("cannot parse '{s}'")))).collect::<Result<_, _>>()?;
        rows.push(vals.chunks(2).map(|p| C64::new(p[0], p[1])).collect());
    }
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(bad("matrix is not square".into()));
    }
    Ok(DMatrix::from_fn(d, d, |r, c| rows[r][c]))
}
