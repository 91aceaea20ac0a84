use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use degrd_cli::commands::{run_command, snapshot_norms, study_command};
use degrd_cli::{code, load_config, output_dir, CliError};

/// Simulator for s-degenerate quasilinear reaction-diffusion systems.
#[derive(Parser)]
#[command(name = "degrd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured model and write a manifest and snapshots.
    Run { config: PathBuf },
    /// Run a named study (kernel_residuals, flux_decay, conservation,
    /// classical_reduction, classical_comparison, truncation, exit_alternatives).
    Study { name: String, config: PathBuf },
    /// Parse and validate a config, printing it with defaults filled in.
    Validate { config: PathBuf },
    /// Print the weighted norms of a snapshot CSV as JSON.
    Norms { snapshot: PathBuf, config: PathBuf },
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Run { config } => {
            let config = load_config(&config)?;
            run_command(&config, &output_dir(&config))
        }
        Command::Study { name, config } => {
            let config = load_config(&config)?;
            study_command(&name, &config, &output_dir(&config))
        }
        Command::Validate { config } => {
            print!("{}", load_config(&config)?.to_toml());
            Ok(code::OK)
        }
        Command::Norms { snapshot, config } => {
            let norms = snapshot_norms(&snapshot, &load_config(&config)?)?;
            println!("{}", serde_json::to_string_pretty(&norms).expect("norm serialization"));
            Ok(code::OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = dispatch(cli.command).unwrap_or_else(|e| {
        eprintln!("error[{}]: {e}", e.class());
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
