use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use collarflow_cli::{emit, parse_config, run_experiment, ExperimentError, Kind};

#[derive(Parser)]
#[command(name = "collarflow", version, about = "Ricci-DeTurck flow experiments on collar charts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory receiving the series table and the summary.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Overrides the `seed` key of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flow and record the sampled norms.
    Simulate { config: PathBuf },
    /// Check the algebraic identities on random states.
    CheckIdentities { config: PathBuf },
    /// Solve the conditioned equation by Picard iteration.
    Duhamel { config: PathBuf },
    /// Run the flow and check the energy estimate.
    Stability { config: PathBuf },
    /// Estimate the bottom of the Dirichlet spectrum.
    Spectrum { config: PathBuf },
}

fn run(cli: &Cli) -> Result<bool, ExperimentError> {
    let (kind, path) = match &cli.command {
        Command::Simulate { config } => (Kind::Simulate, config),
        Command::CheckIdentities { config } => (Kind::CheckIdentities, config),
        Command::Duhamel { config } => (Kind::Duhamel, config),
        Command::Stability { config } => (Kind::Stability, config),
        Command::Spectrum { config } => (Kind::Spectrum, config),
    };
    let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io { path: path.clone(), source })?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let outcome = run_experiment(&cfg, kind)?;
    let (series, summary) = emit(&outcome, &cfg, &cli.out_dir)?;
    if !cli.quiet {
        print!("{}", outcome.summary.render());
        println!("wrote {} and {}", series.display(), summary.display());
    }
    for c in outcome.checks.iter().filter(|c| !c.passed) {
        eprintln!("check {} failed: {}", c.name, c.detail);
    }
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
