//! Command-line front end: JSON configs in, CSV/JSON artifacts out.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "svlab", version, about = "Simulate and test perturbed stochastic Volterra equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (JSON, schema "svlab/1").
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for path ensembles.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discrete-time equation: paths and partial sums.
    SimulateDiscrete,
    /// Volterra SDE by Euler–Maruyama, optionally coupled with the OU process.
    SimulateSve,
    /// Delay equation with an initial history.
    SimulateSfde,
    /// Resolvent of a measure or kernel sequence, with an optional root scan.
    Resolvent,
    /// Evidence for one admissibility condition.
    Check {
        /// One of cond-f, cond-sigma-high, cond-sigma-low, s-epsilon, fading,
        /// lemma-p-lt-1, irregular-windows.
        id: String,
    },
    /// Run a built-in experiment and print its pass/fail table.
    Reproduce {
        /// Experiment id, or criterion-1 .. criterion-12.
        id: String,
    },
    /// Repeat a subcommand over a list of parameter values.
    Sweep,
    /// List the built-in experiments.
    List,
}

fn read_config(path: Option<&Path>) -> Result<String, CliError> {
    let path = path.ok_or_else(|| CliError::Config("--config is required for this subcommand".into()))?;
    fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = cli.config.as_deref();
    let out = cli.out.as_path();
    match &cli.command {
        Command::SimulateDiscrete => {
            commands::run_config("simulate-discrete", None, &read_config(cfg)?, cli.seed, out)?;
        }
        Command::SimulateSve => {
            commands::run_config("simulate-sve", None, &read_config(cfg)?, cli.seed, out)?;
        }
        Command::SimulateSfde => {
            commands::run_config("simulate-sfde", None, &read_config(cfg)?, cli.seed, out)?;
        }
        Command::Resolvent => {
            commands::run_config("resolvent", None, &read_config(cfg)?, cli.seed, out)?;
        }
        Command::Check { id } => {
            if !commands::CHECK_IDS.contains(&id.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown condition id `{id}`; expected one of {}",
                    commands::CHECK_IDS.join(", ")
                )));
            }
            let report = commands::run_config("check", Some(id), &read_config(cfg)?, cli.seed, out)?;
            println!("{id}: {}", report["verdict"].as_str().unwrap_or("?"));
        }
        Command::Reproduce { id } => {
            experiments::lookup(id)
                .ok_or_else(|| CliError::Config(format!("unknown experiment `{id}`")))?;
            let table = experiments::run(id, &out.join("scratch"))?;
            print!("{}", table.render());
            commands::write_json(out, "table.json", &table)?;
            write_table_csv(out, &table)?;
            let canonical = serde_json::json!({"experiment": table.id, "seed": experiments::SEED});
            commands::write_json(out, "manifest.json", &svlab::RunManifest::new(experiments::SEED, &canonical, svlab::Norm::Max))?;
        }
        Command::Sweep => {
            let text = read_config(cfg)?;
            commands::sweep_cmd(config::parse(&text)?, cli.seed, out)?;
        }
        Command::List => {
            for e in &experiments::REGISTRY {
                let c = e.criterion.map_or(String::from("-"), |c| c.to_string());
                println!("{:<24} {:>2}  {}", e.id, c, e.title);
            }
        }
    }
    Ok(())
}

fn write_table_csv(out: &Path, table: &experiments::Table) -> Result<(), CliError> {
    let checks: Vec<String> = table.rows.iter().map(|r| csv_field(&r.check)).collect();
    let mut s = String::from("check,measured,expected,tolerance,pass\n");
    for (r, c) in table.rows.iter().zip(checks) {
        s += &format!(
            "{c},{},{},{},{}\n",
            csv_field(&r.measured),
            csv_field(&r.expected),
            csv_field(&r.tolerance),
            r.pass
        );
    }
    fs::write(out.join("table.csv"), s)?;
    Ok(())
}

/// RFC 4180 quoting.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not set thread count: {e}");
        }
    }
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("svlab: {e}");
            e.exit_code()
        }
    }
}
