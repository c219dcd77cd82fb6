//! Command-line verifier for invariant HKT structures on homogeneous
//! spaces: builds the decomposition and hypercomplex structure for a
//! configured coset, runs residual checks, and emits a JSON report on
//! stdout plus a human table on stderr.
//!
//! Exit codes: 0 all verdicts as expected, 1 verdict mismatch,
//! 2 invalid input, 3 internal error.

mod catalog;
mod config;
mod report;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::JobConfig;
use runner::RunError;

#[derive(Debug, Parser)]
#[command(name = "hkt")]
#[command(
    about = "invariant HKT metrics, HKT-Einstein solutions and Bismut diagnostics on homogeneous spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct JobArgs {
    /// Path to a JSON job configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,

    ///名 of a built-in preset (see `hkt catalog`).
    #[arg(long)]
    preset: Option<String>,

    /// Override the verdict tolerance.
    #[arg(long)]
    tolerance: Option<f64>,

    /// Override the random seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Suppress the human-readable table on stderr.
    #[arg(long)]
    json_only: bool,

    /// Suppress the JSON report on stdout.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the layer decomposition for a configured algebra.
    Decompose(JobArgs),
    /// Run the configured checks and report verdicts.
    Verify(JobArgs),
    /// List the built-in presets with their expected verdicts.
    Catalog {
        #[arg(long)]
        json_only: bool,
        #[arg(long)]
        quiet: bool,
    },
}

fn load_config(args: &JobArgs) -> Result<(JobConfig, Option<String>), ExitCode> {
    let (mut config, preset) = if let Some(name) = &args.preset {
        match catalog::find(name) {
            Some(p) => (p.config, Some(name.clone())),
            None => {
                eprintln!("error: unknown preset `{name}`; run `hkt catalog`");
                return Err(ExitCode::from(2));
            }
        }
    } else if let Some(path) = &args.config {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return Err(ExitCode::from(2));
            }
        };
        match config::parse_config(&text) {
            Ok(c) => (c, None),
            Err(errors) => {
                let doc = serde_json::json!({
                    "schema_version": report::SCHEMA_VERSION,
                    "errors": errors,
                });
                println!("{}", serde_json::to_string_pretty(&doc).unwrap());
                eprintln!(
                    "error: invalid configuration ({} problems)",
                    errors_len(&doc)
                );
                for e in doc["errors"].as_array().unwrap() {
                    eprintln!("  - {}", e.as_str().unwrap());
                }
                return Err(ExitCode::from(2));
            }
        }
    } else {
        eprintln!("error: one of --preset or --config is required");
        return Err(ExitCode::from(2));
    };
    if let Some(t) = args.tolerance {
        if t <= 0.0 {
            eprintln!("error: tolerance must be positive");
            return Err(ExitCode::from(2));
        }
        config.tolerance = t;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    Ok((config, preset))
}

fn errors_len(doc: &serde_json::Value) -> usize {
    doc["errors"].as_array().map(|a| a.len()).unwrap_or(0)
}

fn run_error_exit(e: RunError) -> ExitCode {
    match e {
        RunError::Input(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        RunError::Internal(msg) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Catalog { json_only, quiet } => {
            let doc = catalog::catalog_json();
            if !quiet {
                println!("{}", serde_json::to_string_pretty(&doc).unwrap());
            }
            if !json_only {
                for p in catalog::catalog() {
                    let fails: Vec<String> =
                        p.config.expect.keys().map(|k| k.to_string()).collect();
                    let marker = if p.interpretive.is_some() {
                        " [interpretive]"
                    } else {
                        ""
                    };
                    let expect = if fails.is_empty() {
                        "all pass".to_string()
                    } else {
                        format!("expected failures: {}", fails.join(", "))
                    };
                    eprintln!("{:<18} {}{} ({})", p.name, p.description, marker, expect);
                    if let Some(note) = p.interpretive {
                        eprintln!("{:<18}   note: {note}", "");
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Command::Decompose(args) => {
            let (config, _) = match load_config(&args) {
                Ok(x) => x,
                Err(code) => return code,
            };
            match runner::decompose_report(&config) {
                Ok(doc) => {
                    if !args.quiet {
                        println!("{}", serde_json::to_string_pretty(&doc).unwrap());
                    }
                    if !args.json_only {
                        eprintln!(
                            "depth {} with b_d of dimension {}",
                            doc["depth"], doc["b_dim"]
                        );
                        for (j, layer) in doc["layers"].as_array().unwrap().iter().enumerate() {
                            eprintln!(
                                "layer {}: alpha = {}, |R+| = {}, dim_C f = {}",
                                j + 1,
                                layer["alpha"],
                                layer["r_plus_size"],
                                layer["f_dim_complex"]
                            );
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => run_error_exit(e),
            }
        }
        Command::Verify(args) => {
            let (config, preset) = match load_config(&args) {
                Ok(x) => x,
                Err(code) => return code,
            };
            match runner::run(&config, preset.as_deref()) {
                Ok(report) => {
                    if !args.quiet {
                        println!("{}", report.to_json());
                    }
                    if !args.json_only {
                        eprint!("{}", report.human_table());
                    }
                    if report.overall_pass() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => run_error_exit(e),
            }
        }
    }
}
