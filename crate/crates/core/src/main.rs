use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rdentropy::cli::{self, commands, presets, Mutation, RunStatus};
use rdentropy::{Error, Mode};

#[derive(Parser)]
#[command(name = "rdentropy", version, about = "Entropy decay for A + B <-> C with degenerate diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configuration file and write the time series.
    Run { config: PathBuf },
    /// Check a recorded time series against the decay and inequality bounds.
    Analyze {
        csv: PathBuf,
        #[arg(long)]
        mode: Mode,
        #[arg(long = "dim")]
        dim: usize,
    },
    /// Run the built-in property suites.
    Verify {
        /// Flip the sign of the reaction dissipation to confirm the suites fail.
        #[arg(long, hide = true)]
        mutate_reaction_sign: bool,
    },
    /// Print a built-in configuration (`list` shows the names).
    Preset { name: String },
}

fn execute(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Run { config } => {
            let text = fs::read_to_string(&config).map_err(|e| Error::io(&config, e))?;
            let cfg = cli::parse_config(&text)?;
            match cli::cmd_run(&cfg)? {
                RunStatus::Completed { out_dir, trajectory } => {
                    println!(
                        "{} samples, {} steps written to {}",
                        trajectory.samples.len(),
                        trajectory.stats.steps,
                        out_dir.display()
                    );
                    Ok(true)
                }
                RunStatus::BlewUp { out_dir, error } => {
                    eprintln!("run failed: {error} (see {})", out_dir.join(cli::io::META_FILE).display());
                    Ok(false)
                }
            }
        }
        Command::Analyze { csv, mode, dim } => {
            let report = commands::cmd_analyze(&csv, mode, dim)?;
            print!("{}", report.to_text());
            Ok(report.all_pass())
        }
        Command::Verify { mutate_reaction_sign } => {
            let (ok, text) = cli::cmd_verify(Mutation {
                flip_reaction_sign: mutate_reaction_sign,
            })?;
            print!("{text}");
            Ok(ok)
        }
        Command::Preset { name } => {
            if name == "list" {
                for n in presets::NAMES {
                    println!("{n}");
                }
                return Ok(true);
            }
            let cfg = cli::preset(&name).ok_or_else(|| {
                Error::InvalidArgument(format!("unknown preset `{name}`; known: {}", presets::NAMES.join(", ")))
            })?;
            print!("{}", cfg.to_text());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
