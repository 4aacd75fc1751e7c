use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qmirror_cli::config::{load_config, Mode, Overrides};
use qmirror_cli::run::{self, Report, RunError};

/// Ghost-imaging simulator and imaging-law verifier.
#[derive(Parser)]
#[command(name = "qmirror", version)]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the coincidence simulation and export images.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        pairs: Option<u64>,
    },
    /// Convergence study of the oracle against the spherical-mirror laws.
    VerifyLaws {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Two-photon thin-lens table, distances in mm.
    LensLaw {
        #[arg(long)]
        f: f64,
        /// Object distances as `a:b:step`.
        #[arg(long)]
        so_range: String,
    },
    /// Compare the coincidence image with the Klyshko-folded classical image.
    FoldCheck {
        #[arg(long)]
        config: PathBuf,
    },
}

fn finish(report: &Report) -> ExitCode {
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!(
            "threshold failed: {} = {} (want {})",
            c.name, c.value, c.limit
        );
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn run(cli: Cli) -> Result<ExitCode, RunError> {
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    match cli.command {
        Command::Simulate {
            config,
            out,
            seed,
            pairs,
        } => {
            let loaded = load_config(&config, Mode::Simulate, &Overrides { seed, pairs })?;
            let report = run::simulate(&loaded, &out, workers)?;
            Ok(finish(&report))
        }
        Command::VerifyLaws { config, out } => {
            let loaded = load_config(&config, Mode::VerifyLaws, &Overrides::default())?;
            let report = run::verify_laws(&loaded, &out, workers)?;
            Ok(finish(&report))
        }
        Command::LensLaw { f, so_range } => {
            let s_o = run::parse_range(&so_range)?;
            run::lens_law(f, &s_o, std::io::stdout().lock())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::FoldCheck { config } => {
            let loaded = load_config(&config, Mode::FoldCheck, &Overrides::default())?;
            let (report, _) = run::fold_check(&loaded, workers)?;
            print!("{}", report.to_json());
            Ok(finish(&report))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
