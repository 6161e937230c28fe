//! The library side of `backaction simulate` and `backaction master`:
//! run a config file, integrate its master equation and compare the two.
//!
//! `cargo run --release --example run_config -- configs/unraveling.toml`

use std::path::PathBuf;

use backaction::run::{analyze, compare, master, simulate, Tolerance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "configs/unraveling.toml".into()).into();
    let root = std::env::temp_dir().join("backaction-run-config");
    let traj = simulate(&config, Some(&root.join("trajectories")), None)?;
    let exact = master(&config, Some(&root.join("master")))?;
    let report = compare(&traj, &exact, &Tolerance::parse("0.05")?)?;
    for (name, col) in &report.columns {
        println!("{name:12} max |dev| {:.4}", col.max_abs);
    }
    if let Some(d) = report.trace_distance {
        println!("trace distance of final states {d:.4}");
    }
    let stats = analyze(&traj, "n_0")?;
    let last = stats.times.len() - 1;
    println!("n_0 at t = {}: {:.4} +- {:.4}", stats.times[last], stats.mean[last], stats.stderr[last]);
    Ok(())
}
