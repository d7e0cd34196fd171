use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use infobridge_cli::{load_config, run, Overrides};

/// Information-process laboratory: simulate default-time bridges, estimate
/// energies, capacities and hitting probabilities, and run the
/// predictability experiment.
#[derive(Parser)]
#[command(name = "infobridge", version)]
struct Cli {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the number of Monte Carlo paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Run a single cover level instead of the configured list.
    #[arg(long)]
    level: Option<u32>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut config = match load_config(&cli.config) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    Overrides {
        seed: cli.seed,
        out: cli.out,
        paths: cli.paths,
        level: cli.level,
    }
    .apply(&mut config);
    if let Err(e) = config.validate() {
        eprintln!("config error: {e}");
        return ExitCode::from(2);
    }
    match run(&config) {
        Ok(report) => {
            println!(
                "{} finished in {:.2?}; config hash {}",
                config.command.name(),
                report.wall,
                &report.config_hash[..12],
            );
            for artifact in &report.artifacts {
                println!("wrote {}", artifact.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("runtime error: {e}");
            ExitCode::from(3)
        }
    }
}
