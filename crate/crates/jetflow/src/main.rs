use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jetflow::{config, load_plan, run_config, Kind, RunError, OUTPUT_DIR_ENV};

/// Estimate push-forwards of analytic maps from samples and run the reference experiments.
#[derive(Parser)]
#[command(name = "jetflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML configuration.
    ///
    /// Output goes to `output_dir` from the configuration, unless the
    /// JETFLOW_OUTPUT_DIR environment variable is set.
    Run { config: PathBuf },
    /// Check a configuration without running it.
    Validate { config: PathBuf },
    /// Print a ready-to-run configuration for an experiment kind.
    Demo {
        #[arg(value_parser = kind_names())]
        kind: String,
    },
}

fn kind_names() -> clap::builder::PossibleValuesParser {
    clap::builder::PossibleValuesParser::new(Kind::ALL.map(Kind::name))
}

fn fail(err: &RunError) -> ExitCode {
    eprintln!("{}", err.to_json());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let override_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
            match run_config(&config, override_dir.as_deref()) {
                Ok(report) => {
                    for file in &report.files {
                        println!("{}", file.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(err) => fail(&err),
            }
        }
        Command::Validate { config } => match load_plan(&config) {
            Ok(plan) => {
                println!("ok: {}", plan.kind.name());
                ExitCode::SUCCESS
            }
            Err(err) => fail(&err),
        },
        Command::Demo { kind } => {
            let kind = Kind::from_name(&kind).expect("restricted by the parser");
            print!("{}", config::demo(kind));
            ExitCode::SUCCESS
        }
    }
}
