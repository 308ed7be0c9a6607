use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qtraj_cli::{exit_code, run, Command};

/// Trajectories whose time-occupation density reproduces a quantum
/// position density.
#[derive(Parser, Debug)]
#[command(name = "qtraj", version)]
struct Args {
    /// Pipeline to run.
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    config: PathBuf,
    /// Output directory; overrides `[output] directory`.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Do not print the summary.
    #[arg(long, short)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = run(args.command, &args.config, args.out.as_deref());
    match &result {
        Ok(outcome) => {
            if !args.quiet {
                let metrics = &outcome.summary["metrics"];
                println!(
                    "{}",
                    serde_json::to_string_pretty(metrics).unwrap_or_default()
                );
                for f in &outcome.files {
                    println!("wrote {}", f.display());
                }
            }
            if !outcome.passed {
                eprintln!("qtraj: verification failed");
            }
        }
        Err(e) => eprintln!("qtraj: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
