use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use backaction::run::{self, RunError, Tolerance};
use backaction::trajectory::workers_from_env;

#[derive(Parser)]
#[command(name = "backaction", version, about = "Quantum trajectories of Hubbard lattices under global light measurement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the trajectory ensemble described by a config file.
    Simulate {
        config: PathBuf,
        /// Artifact directory, overriding `[output] directory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the master equation for a config file.
    Master {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the mean series of two artifact directories.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// `0.05` or `default=0.05,n_0=0.01`.
        #[arg(long)]
        tol: Option<String>,
        /// Also write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print `time,mean,stderr` of one observable.
    Analyze {
        dir: PathBuf,
        #[arg(long)]
        observable: String,
    },
}

fn execute(cli: Cli) -> Result<bool, RunError> {
    match cli.command {
        Command::Simulate { config, out } => {
            let workers = workers_from_env()?;
            let dir = run::simulate(&config, out.as_deref(), workers)?;
            println!("{}", dir.display());
        }
        Command::Master { config, out } => {
            println!("{}", run::master(&config, out.as_deref())?.display());
        }
        Command::Compare { a, b, tol, report } => {
            let tol = tol.as_deref().map(Tolerance::parse).transpose()?.unwrap_or_default();
            let r = run::compare(&a, &b, &tol)?;
            let json = serde_json::to_string_pretty(&r).expect("report serializes");
            if let Some(path) = report {
                std::fs::write(&path, format!("{json}\n")).map_err(|e| RunError::Io(path, e))?;
            }
            println!("{json}");
            return Ok(r.pass);
        }
        Command::Analyze { dir, observable } => {
            let s = run::analyze(&dir, &observable)?;
            println!("time,mean,stderr");
            for i in 0..s.times.len() {
                println!("{:.16e},{:.16e},{:.16e}", s.times[i], s.mean[i], s.stderr[i]);
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
