use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use decoherence_cli::{run, scenario_ids, validate, Overrides};

#[derive(Parser)]
#[command(
    name = "decohere",
    version,
    about = "Decoherence scenarios for coupled oscillator and spin systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV and manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Seed for random initial states.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long = "t-max")]
        t_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Oscillator truncation (Hilbert dimension for fig1).
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Run the built-in invariant checks.
    Validate,
    /// Print the scenario ids.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            tau,
            t_max,
            steps,
            dim,
        } => {
            let overrides = Overrides {
                seed,
                tau,
                t_max,
                steps,
                dim,
            };
            match run(&config, &out, &overrides) {
                Ok(manifest) => {
                    for s in manifest.saturation.iter().filter(|s| !s.saturated) {
                        eprintln!("note: {} unsaturated at t_max (decay factor {:.3e})", s.label, s.factor);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code())
                }
            }
        }
        Command::Validate => match validate(&mut std::io::stdout()) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::FAILURE,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::List => {
            for id in scenario_ids() {
                println!("{id}");
            }
            ExitCode::SUCCESS
        }
    }
}
