use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use visco3d::harness::{run, Mode, RunConfig};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

/// Pseudo-spectral viscoelastic solver with energy diagnostics.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate seeded small data and write energies.csv and summary.json.
    Simulate(Flags),
    /// Check the algebraic identities on random fields and print a pass/fail table.
    Identities(Flags),
    /// Simulate and check the energy dissipation law (writes dissipation.csv).
    Dissipation(Flags),
    /// Simulate and report fitted decay exponents.
    DecayReport(Flags),
}

#[derive(Args)]
struct Flags {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid points per axis.
    #[arg(long)]
    n: Option<usize>,
    /// Size of the initial perturbation.
    #[arg(long)]
    eps: Option<f64>,
    /// Final time.
    #[arg(long)]
    tend: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config(mode: Mode, flags: Flags) -> visco3d::Result<RunConfig> {
    let mut cfg = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.mode = mode;
    if let Some(v) = flags.seed {
        cfg.seed = v;
    }
    if let Some(v) = flags.n {
        cfg.n = v;
    }
    if let Some(v) = flags.eps {
        cfg.epsilon = v;
    }
    if let Some(v) = flags.tend {
        cfg.t_end = v;
    }
    if let Some(v) = flags.out {
        cfg.output_dir = v;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let (mode, flags) = match Cli::parse().command {
        Command::Simulate(f) => (Mode::Simulate, f),
        Command::Identities(f) => (Mode::Identities, f),
        Command::Dissipation(f) => (Mode::Dissipation, f),
        Command::DecayReport(f) => (Mode::DecayReport, f),
    };
    let report = config(mode, flags).and_then(|cfg| run(&cfg));
    match report {
        Ok(report) => {
            println!("{}", report.text);
            if report.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
