//! `pseudoliouville <command> --scene <file> [--out <dir>] [--seed <u64>]`
//!
//! Every command reads one scene file, writes `<out>/<command>.json`
//! (plus `<command>.csv` where the result is a trajectory) and echoes
//! the JSON document on stdout.  All error paths exit nonzero with a
//! one-line JSON diagnostic on stderr.  Outputs are byte-identical
//! across runs with the same scene and seed.

mod commands;
mod error;
mod jsonfmt;
mod scene;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "pseudoliouville",
    version,
    about = "Construct and test 2-D pseudo-Riemannian systems with quadratic integrals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the (metric, integral) pair at the domain centre
    Classify(CommonArgs),
    /// Bound |{H, F}| over seeded random phase-space points
    BracketCheck(CommonArgs),
    /// Integrate the Hamiltonian flow and record the trajectory
    Geodesic(CommonArgs),
    /// Compare the metric with its constructed projective partner
    EquivCheck(CommonArgs),
    /// Integrate the reduced flow and check its characteristic
    Quadrature(CommonArgs),
    /// Measure the commutator of the quantised pair across grids
    QuantumCheck(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scene file (one JSON document)
    #[arg(long)]
    scene: PathBuf,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the scene's seed
    #[arg(long)]
    seed: Option<u64>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Classify(_) => "classify",
            Command::BracketCheck(_) => "bracket-check",
            Command::Geodesic(_) => "geodesic",
            Command::EquivCheck(_) => "equiv-check",
            Command::Quadrature(_) => "quadrature",
            Command::QuantumCheck(_) => "quantum-check",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Classify(a)
            | Command::BracketCheck(a)
            | Command::Geodesic(a)
            | Command::EquivCheck(a)
            | Command::Quadrature(a)
            | Command::QuantumCheck(a) => a,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", CliError::new("usage", e.to_string()).to_json());
            return ExitCode::from(2);
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}

fn run(command: &Command) -> Result<(), CliError> {
    let args = command.args();
    let scene = scene::SceneConfig::load(&args.scene)?;
    let system = scene.build_system()?;
    let seed = args.seed.or(scene.seed).unwrap_or(0);

    let output = match command {
        Command::Classify(_) => commands::classify(&scene, &system)?,
        Command::BracketCheck(_) => commands::bracket_check(&scene, &system, seed)?,
        Command::Geodesic(_) => commands::geodesic(&scene, &system)?,
        Command::EquivCheck(_) => commands::equiv_check(&scene, &system)?,
        Command::Quadrature(_) => commands::quadrature(&scene, &system)?,
        Command::QuantumCheck(_) => commands::quantum_check(&scene, &system)?,
    };

    let json_text = jsonfmt::to_string_pretty(&output.json);
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let json_path = args.out.join(format!("{}.json", command.name()));
    std::fs::write(&json_path, &json_text).map_err(|e| CliError::io(&json_path, e))?;
    if let Some(csv) = &output.csv {
        let csv_path = args.out.join(format!("{}.csv", command.name()));
        std::fs::write(&csv_path, csv).map_err(|e| CliError::io(&csv_path, e))?;
    }
    print!("{json_text}");
    Ok(())
}
