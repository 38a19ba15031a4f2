//! `beamlab` — experiment runner for the numerical laboratory.
//!
//! Exit codes: 0 pass, 1 assertion failure, 2 configuration error,
//! 3 numerical failure.

mod config;
mod experiments;
mod manifest;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{validate, ExperimentConfig};
use manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "beamlab",
    about = "Gaussian-beam / X-ray / observability experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run { config: PathBuf },
    /// Statically validate a config without running it.
    Validate { config: PathBuf },
    /// List registered fixture ids.
    ListFixtures,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::ListFixtures => {
            for (kind, ids) in beamlab::registry::list_fixtures() {
                println!("{kind}:");
                for id in ids {
                    println!("  {id}");
                }
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => {
            let cfg = match ExperimentConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            let diags = validate(&cfg);
            if diags.is_empty() {
                println!("ok: no diagnostics");
                return ExitCode::SUCCESS;
            }
            let mut worst = ExitCode::SUCCESS;
            for d in &diags {
                println!("{}: {}", d.severity, d.message);
                if d.severity == "error" {
                    worst = ExitCode::from(2);
                }
            }
            worst
        }
        Command::Run { config } => {
            let cfg = match ExperimentConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            let errors: Vec<_> = validate(&cfg)
                .into_iter()
                .filter(|d| d.severity == "error")
                .collect();
            if !errors.is_empty() {
                for d in &errors {
                    eprintln!("error: {}", d.message);
                }
                // The manifest is written even for configuration failures.
                let mut manifest = RunManifest::new(cfg.clone());
                manifest.error = Some(
                    errors
                        .iter()
                        .map(|d| d.message.clone())
                        .collect::<Vec<_>>()
                        .join("; "),
                );
                let _ = manifest.write(&cfg.output_root());
                return ExitCode::from(2);
            }
            let dir = cfg.output_root();
            let started = std::time::Instant::now();
            let mut manifest = RunManifest::new(cfg.clone());
            let result = experiments::run(&cfg, &mut manifest, &dir);
            manifest.wall_time_secs = started.elapsed().as_secs_f64();
            let code = match result {
                Ok(()) => {
                    if manifest.all_passed() {
                        ExitCode::SUCCESS
                    } else {
                        for a in manifest.assertions.iter().filter(|a| !a.passed) {
                            eprintln!("assertion failed: {} ({})", a.name, a.detail);
                        }
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("numerical failure: {e}");
                    manifest.error = Some(e.to_string());
                    ExitCode::from(3)
                }
            };
            if let Err(e) = manifest.write(&dir) {
                eprintln!("cannot write manifest: {e}");
                return ExitCode::from(3);
            }
            println!(
                "{}: {} outputs, {} assertion(s), {:.2}s",
                dir.display(),
                manifest.outputs.len(),
                manifest.assertions.len(),
                manifest.wall_time_secs
            );
            code
        }
    }
}
