use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xprop_cli::{execute, Command, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "xprop",
    version,
    about = "Extended-Lagrangian propagator experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate a classical world line and compare with closed forms.
    Classical(Common),
    /// Step a field with the proper-time kernel.
    Propagate(Common),
    /// Klein–Gordon operator checks, order study and moment table.
    KgSuite(Common),
    /// Gaussian kernel moments against the damped Fresnel oracle.
    Moments(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides [output].dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for generated fields (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Classical(c) => (Command::Classical, c),
        Cmd::Propagate(c) => (Command::Propagate, c),
        Cmd::KgSuite(c) => (Command::KgSuite, c),
        Cmd::Moments(c) => (Command::Moments, c),
    };
    let result = ExperimentConfig::load(&common.config)
        .map_err(Into::into)
        .and_then(|cfg| execute(command, &cfg, common.out, common.seed));
    match result {
        Ok(outcome) => {
            for c in &outcome.manifest.checks {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                println!("{tag} {}: {:e} ({})", c.name, c.value, c.threshold);
            }
            println!(
                "{} files written to {}",
                outcome.manifest.files.len() + 1,
                outcome.out_dir.display()
            );
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
