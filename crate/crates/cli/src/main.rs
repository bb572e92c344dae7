use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zeropi_cli::{parse_config, run, Mode};

#[derive(Parser)]
#[command(
    name = "zeropi",
    version,
    about = "Spectra, sweeps and disorder analysis of the 0-pi circuit"
)]
struct Cli {
    #[command(subcommand)]
    mode: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lowest levels and D for one parameter set.
    Spectrum(Common),
    /// Levels and D across external flux values.
    FluxSweep(Common),
    /// E_J-optimized D over a grid of E_L and E_CSigma.
    DmaxGrid(Common),
    /// E_J-optimized D for one E_L, E_CSigma pair.
    EjOptimize(Common),
    /// D against junction-energy or junction-capacitance asymmetry.
    DisorderSweep(Common),
    /// Couplings to the chi mode and the resulting Stark and Lamb shifts.
    Dispersive(Common),
    /// Wavefunctions on the grid.
    WavefunctionExport(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides `workers` in the config.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match cli.mode {
        Command::Spectrum(a) => (Mode::Spectrum, a),
        Command::FluxSweep(a) => (Mode::FluxSweep, a),
        Command::DmaxGrid(a) => (Mode::DmaxGrid, a),
        Command::EjOptimize(a) => (Mode::EjOptimize, a),
        Command::DisorderSweep(a) => (Mode::DisorderSweep, a),
        Command::Dispersive(a) => (Mode::Dispersive, a),
        Command::WavefunctionExport(a) => (Mode::WavefunctionExport, a),
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::FAILURE;
        }
    };
    let mut config = match parse_config(&text, Some(mode)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::FAILURE;
        }
    };
    if let Some(w) = args.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::FAILURE;
        }
        config.workers = w;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    match run(&config, &args.out) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if outcome.hard_failures > 0 {
                eprintln!("{} point(s) failed; see manifest.txt", outcome.hard_failures);
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
