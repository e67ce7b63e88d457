//! `nlslab` command line: run, sweep and verify experiments from JSON configs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use nlslab::config::ExperimentConfig;
use nlslab::error::NlsError;
use nlslab::experiment::{run, sweep, RunReport};

/// Default config of `nlslab verify`.
const DEFAULT_VERIFY: &str = include_str!("../../../configs/verify.json");

#[derive(Parser)]
#[command(name = "nlslab", version, about = "Numerical lab for NLS solitons, trains and kinks")]
struct Cli {
    /// Output directory (overrides the config's `output`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (falls back to NLSLAB_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run { config: PathBuf },
    /// Run an experiment once per value of a scalar config parameter.
    Sweep {
        config: PathBuf,
        /// Dotted path of the parameter, e.g. `train.pair.v_star`.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Run the property suite (bundled config when none is given).
    Verify { config: Option<PathBuf> },
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn exit_for(err: &NlsError) -> u8 {
    match err.root() {
        NlsError::Config { .. } => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn read_json(path: &Path) -> Result<Value, NlsError> {
    let text = std::fs::read_to_string(path).map_err(|e| NlsError::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| NlsError::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn print_report(report: &RunReport) {
    for c in &report.checks {
        let verdict = if c.pass { "pass" } else { "FAIL" };
        if c.relation.starts_with("in") || c.relation == "holds" {
            println!("{verdict}  {}: {:.6e} ({})", c.name, c.value, c.relation);
        } else {
            println!("{verdict}  {}: {:.6e} ({} {:e})", c.name, c.value, c.relation, c.threshold);
        }
    }
    println!(
        "{}: {}/{} checks passed in {:.2} s",
        report.experiment,
        report.checks.iter().filter(|c| c.pass).count(),
        report.checks.len(),
        report.wall_time_s
    );
}

fn run_config(value: Value, out: Option<PathBuf>) -> Result<u8, NlsError> {
    let cfg = ExperimentConfig::from_value(value)?;
    let dir = out.unwrap_or_else(|| cfg.output.clone());
    let report = run(&cfg, &dir)?;
    print_report(&report);
    Ok(if report.passed() { 0 } else { EXIT_FAIL })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| std::env::var("NLSLAB_THREADS").ok().and_then(|s| s.parse().ok()));
    if let Some(n) = threads {
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = match cli.command {
        Command::Run { config } => read_json(&config).and_then(|v| run_config(v, cli.out)),
        Command::Verify { config } => {
            let value = match config {
                Some(path) => read_json(&path),
                None => serde_json::from_str(DEFAULT_VERIFY).map_err(|e| NlsError::Config {
                    path: "<bundled verify config>".into(),
                    message: e.to_string(),
                }),
            };
            value.and_then(|v| run_config(v, cli.out))
        }
        Command::Sweep { config, param, values } => read_json(&config).and_then(|v| {
            let out = match cli.out {
                Some(o) => o,
                None => ExperimentConfig::from_value(v.clone())?.output,
            };
            let report = sweep(&v, &param, &values, &out)?;
            let mut all_pass = true;
            for row in &report.rows {
                match (&row.report, &row.error) {
                    (Some(r), _) => {
                        all_pass &= r.passed();
                        let head: Vec<String> = r.headline.iter().map(|(k, x)| format!("{k}={x:.6e}")).collect();
                        println!("{} = {}: {}  {}", param, row.value, if r.passed() { "pass" } else { "FAIL" }, head.join(" "));
                    }
                    (None, e) => {
                        all_pass = false;
                        println!("{} = {}: error: {}", param, row.value, e.as_deref().unwrap_or("unknown"));
                    }
                }
            }
            Ok(if all_pass { 0 } else { EXIT_FAIL })
        }),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
