use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use stratflow_cli::{run, Command, ExperimentSpec};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Simulate,
    Limit,
    Converge,
    GammaCheck,
    ResonanceCensus,
    QgEquiv,
    Pancake,
}

/// Stratified Boussinesq amplitude solver and experiment driver.
#[derive(Debug, Parser)]
#[command(name = "stratflow", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Seed for random initial data.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override a configuration key, e.g. `--set physics.nu=0.05`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let a = Args::parse();
    let command = match a.command {
        Cmd::Simulate => Command::Simulate,
        Cmd::Limit => Command::Limit,
        Cmd::Converge => Command::Converge,
        Cmd::GammaCheck => Command::GammaCheck,
        Cmd::ResonanceCensus => Command::ResonanceCensus,
        Cmd::QgEquiv => Command::QgEquiv,
        Cmd::Pancake => Command::Pancake,
    };
    let spec = ExperimentSpec {
        command,
        config: a.config,
        out: a.out,
        seed: a.seed,
        overrides: a.overrides,
    };
    match run(&spec) {
        Ok(s) => {
            println!("{}", s.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
