//! Operational shell for the thermopile processing pipeline: simulation,
//! tracking, counting, screening, fitting and evaluation, over JSONL files
//! or live newline-JSON sockets. Verbosity comes from the THERMOTRACK_LOG
//! environment variable.

use std::process::ExitCode;

use clap::Parser;

mod commands;
mod ingest;

use commands::{count, eval, fit, screen, simulate, track};

#[derive(Parser, Debug)]
#[command(name = "thermotrack", version, about = "Thermopile-array occupancy, localization and temperature screening")]
enum Cli {
    /// Generate synthetic frames, ground truth (and radar) from a preset.
    Simulate(simulate::SimulateArgs),
    /// Track per-ROI occupancy, distance and AOA from a wall-mounted array.
    Track(track::TrackArgs),
    /// Count subjects and emit distancing alerts from a ceiling array.
    Count(count::CountArgs),
    /// Screen body temperature for subjects near a wall-mounted array.
    Screen(screen::ScreenArgs),
    /// Fit model parameters from calibration data.
    Fit(fit::FitArgs),
    /// Evaluate estimates against ground truth or labeled windows.
    Eval(eval::EvalArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("THERMOTRACK_LOG")).init();
    let cli = Cli::parse();
    let result = match &cli {
        Cli::Simulate(args) => simulate::run(args),
        Cli::Track(args) => track::run(args),
        Cli::Count(args) => count::run(args),
        Cli::Screen(args) => screen::run(args),
        Cli::Fit(args) => fit::run(args),
        Cli::Eval(args) => eval::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
