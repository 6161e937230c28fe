//! End-to-end runs of the `backaction` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BASE: &str = r#"[model]
species = "boson"
sites = 4
particles = 2
tunneling = 1.0
interaction = 2.0

[probe]
geometry = "odd_sites"
gamma = 0.5

[engine]
t_final = 2.0
sample_interval = 0.25
seed = 11
n_traj = 8

[init]
state = "fock:1,0,1,0"

[observables]
imbalance = true

[output]
directory = "out"
"#;

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_backaction"));
    cmd.args(args).env_remove("BACKACTION_WORKERS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn simulate(tmp: &TempDir, name: &str, text: &str) -> PathBuf {
    let cfg = write_config(tmp.path(), &format!("{name}.toml"), text);
    let out = tmp.path().join(name);
    let o = run(&["simulate", arg(&cfg), "--out", arg(&out)], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

fn header(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().next().unwrap().split(',').map(str::to_string).collect()
}

#[test]
fn simulate_writes_the_artifact_set() {
    let tmp = TempDir::new().unwrap();
    let out = simulate(&tmp, "run", BASE);
    for f in ["config.toml", "manifest.json", "aggregate.csv", "stderr.csv", "jumps.csv", "rho_final.csv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    assert_eq!(fs::read_dir(out.join("trajectories")).unwrap().count(), 8);

    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    for key in ["config_hash", "seed", "n_traj", "schema_version", "jump_counts", "wall_seconds"] {
        assert!(manifest.get(key).is_some(), "manifest lacks {key}");
    }
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["n_traj"], 8);
    assert_eq!(manifest["jump_counts"].as_array().unwrap().len(), 8);

    let cols = header(&out.join("trajectories/traj_00000.csv"));
    assert_eq!(cols, ["time", "traj_id", "n_0", "n_1", "n_2", "n_3", "z"]);
    assert_eq!(header(&out.join("jumps.csv")), ["traj_id", "time", "channel", "label"]);
    let rows = fs::read_to_string(out.join("aggregate.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 9);
}

#[test]
fn rerun_and_worker_count_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", BASE);
    let mut dirs = Vec::new();
    for (i, workers) in ["1", "3", "3"].iter().enumerate() {
        let out = tmp.path().join(format!("out{i}"));
        let o = run(&["simulate", arg(&cfg), "--out", arg(&out)], &[("BACKACTION_WORKERS", workers)]);
        assert!(o.status.success(), "{}", stderr(&o));
        dirs.push(out);
    }
    for f in ["aggregate.csv", "jumps.csv", "trajectories/traj_00005.csv", "rho_final.csv"] {
        let a = fs::read(dirs[0].join(f)).unwrap();
        assert!(dirs[1..].iter().all(|d| fs::read(d.join(f)).unwrap() == a), "{f} differs");
    }
}

#[test]
fn geometry_length_mismatch_is_a_located_config_error() {
    let tmp = TempDir::new().unwrap();
    let text = BASE.replace("geometry = \"odd_sites\"", "geometry = \"custom\"\ncoefficients = [1.0, 0.0, 1.0]");
    let cfg = write_config(tmp.path(), "bad.toml", &text);
    let o = run(&["simulate", arg(&cfg), "--out", arg(&tmp.path().join("x"))], &[]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("bad.toml:10:"), "{msg}");
    assert!(msg.contains('3') && msg.contains('4'), "{msg}");
}

#[test]
fn unknown_keys_and_bad_workers_exit_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "typo.toml", &BASE.replace("seed = 11", "seed = 11\nsede = 1"));
    let o = run(&["simulate", arg(&cfg)], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("typo.toml:16:"), "{}", stderr(&o));

    let cfg = write_config(tmp.path(), "ok.toml", BASE);
    let o = run(&["simulate", arg(&cfg), "--out", arg(&tmp.path().join("w"))], &[("BACKACTION_WORKERS", "0")]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn dimension_cap_exits_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "big.toml", &BASE.replace("interaction = 2.0", "interaction = 2.0\ncap = 9"));
    let o = run(&["simulate", arg(&cfg), "--out", arg(&tmp.path().join("x"))], &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    let cfg = write_config(tmp.path(), "master.toml", &BASE.replace("interaction = 2.0", "interaction = 2.0\nmaster_cap = 9"));
    let o = run(&["master", arg(&cfg), "--out", arg(&tmp.path().join("y"))], &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn analyze_reports_mean_and_stderr() {
    let tmp = TempDir::new().unwrap();
    let out = simulate(&tmp, "run", BASE);
    let o = run(&["analyze", arg(&out), "--observable", "z"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time,mean,stderr"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    // every trajectory starts with both atoms on the lit sites
    assert_eq!(first, [0.0, 1.0, 0.0]);
    assert_eq!(text.lines().count(), 1 + 9);

    let o = run(&["analyze", arg(&out), "--observable", "nope"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("n_0"), "{}", stderr(&o));
}

#[test]
fn compare_identical_and_mismatched_runs() {
    let tmp = TempDir::new().unwrap();
    let a = simulate(&tmp, "a", BASE);
    let b = simulate(&tmp, "b", BASE);
    let o = run(&["compare", arg(&a), arg(&b)], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["pass"], true);
    for (_, col) in report["columns"].as_object().unwrap() {
        assert_eq!(col["max_abs"], 0.0);
    }
    assert_eq!(report["trace_distance"], 0.0);

    let other = simulate(&tmp, "c", &BASE.replace("seed = 11", "seed = 12"));
    let o = run(&["compare", arg(&a), arg(&other)], &[]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["compare", arg(&a), arg(&other), "--tol", "10"], &[]);
    assert_eq!(o.status.code(), Some(0));

    let coarse = simulate(&tmp, "d", &BASE.replace("sample_interval = 0.25", "sample_interval = 0.5"));
    let o = run(&["compare", arg(&a), arg(&coarse)], &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn pure_dephasing_leaves_fock_densities_fixed() {
    let tmp = TempDir::new().unwrap();
    let text = BASE.replace("tunneling = 1.0", "tunneling = 0.0").replace("gamma = 0.5", "gamma = 3.0");
    let cfg = write_config(tmp.path(), "deph.toml", &text);
    let out = tmp.path().join("m");
    let o = run(&["master", arg(&cfg), "--out", arg(&out)], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(out.join("master.csv")).unwrap();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let n: Vec<f64> = (2..6).map(|k| rec[k].parse().unwrap()).collect();
        for (got, want) in n.iter().zip([1.0, 0.0, 1.0, 0.0]) {
            assert!((got - want).abs() < 1e-12, "{n:?}");
        }
        rows += 1;
    }
    assert_eq!(rows, 9);
}

#[test]
fn unmeasured_master_run_matches_the_single_trajectory() {
    let tmp = TempDir::new().unwrap();
    let text = BASE.replace("gamma = 0.5", "gamma = 0.0").replace("n_traj = 8", "n_traj = 1");
    let sim = simulate(&tmp, "sim", &text);
    let cfg = write_config(tmp.path(), "m.toml", &text);
    let master = tmp.path().join("m");
    let o = run(&["master", arg(&cfg), "--out", arg(&master)], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["compare", arg(&sim), arg(&master), "--tol", "1e-6"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["trace_distance"].as_f64().unwrap() < 1e-6);
}
