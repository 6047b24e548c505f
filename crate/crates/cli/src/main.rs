use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use renewal_coupling_cli::{run, validate_file, CliError, ModeName, Overrides};

#[derive(Parser)]
#[command(name = "renewal-coupling", version, about = "Renewal, coupling and piecewise-linear Markov experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Event,
    Stepped,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSV outputs plus manifest.toml.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides `experiment.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Step size for stepped mode and for the event-mode fallback.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Check a config without simulating; prints one diagnostic per line.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            seed,
            workers,
            mode,
            step,
        } => {
            let overrides = Overrides {
                seed,
                workers,
                mode: mode.map(|m| match m {
                    Mode::Event => ModeName::Event,
                    Mode::Stepped => ModeName::Stepped,
                }),
                step,
            };
            match run(&config, &out, &overrides) {
                Ok(report) => {
                    for line in &report.summary {
                        println!("{line}");
                    }
                    for (name, sum) in &report.manifest.outputs {
                        println!("wrote {} ({sum})", out.join(name).display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Validate { config } => match validate_file(&config) {
            Ok(diags) if diags.is_empty() => ExitCode::SUCCESS,
            Ok(diags) => {
                for d in diags {
                    println!("{d}");
                }
                ExitCode::from(2)
            }
            Err(e) => fail(e),
        },
    }
}
