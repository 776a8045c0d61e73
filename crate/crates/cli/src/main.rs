//! Command-line front end: solve manifests, brute-force oracles, reports,
//! calibration runs and SLM pattern export.

mod artifact;
mod calibrate;
mod error;
mod holo;
mod manifest;
mod report;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use photonic_ising::ising::{brute_force_ground_capped, DEFAULT_BRUTE_FORCE_CAP};
use serde::Serialize;

use artifact::{emit, stamped_json, Stamp};
use error::{CliError, CliResult};
use manifest::{Generator, ProblemSource, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "photonic-ising", version, about = "Optical Ising annealer digital twin")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a manifest: replicas, traces, probability curve and summary.
    Solve {
        manifest: PathBuf,
        /// Overrides the manifest's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact ground state by enumeration.
    Oracle(OracleArgs),
    /// Noise, performance or geometry document.
    Report {
        #[command(subcommand)]
        kind: report::ReportKind,
        /// Output file; stdout when absent.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Calibrate a matrix rig with injected errors and benchmark it.
    Calibrate(calibrate::CalibrateArgs),
    /// Render an SLM pattern.
    Holo(holo::HoloArgs),
}

/// One problem source: a file or a generator.
#[derive(Debug, Args, Serialize)]
pub struct ProblemArgs {
    /// Problem JSON (edge list or dense matrix).
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Möbius ladder with this many spins.
    #[arg(long)]
    pub mobius: Option<usize>,
    /// Random ±1 glass with this many spins.
    #[arg(long)]
    pub glass: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub glass_seed: u64,
}

impl ProblemArgs {
    pub fn source(&self) -> CliResult<Option<ProblemSource>> {
        match (&self.problem, self.mobius, self.glass) {
            (Some(p), None, None) => Ok(Some(ProblemSource::File(p.clone()))),
            (None, Some(n), None) => Ok(Some(ProblemSource::Generator(Generator::MobiusLadder { n }))),
            (None, None, Some(n)) => Ok(Some(ProblemSource::Generator(Generator::RandomGlass { n, seed: self.glass_seed }))),
            (None, None, None) => Ok(None),
            _ => Err(CliError::config("give only one of --problem, --mobius, --glass")),
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct OracleArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Largest n to enumerate.
    #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_CAP)]
    cap: usize,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct OracleDoc {
    n: usize,
    h_min: f64,
    ground_state: String,
    /// The global flip of `ground_state`, which has the same energy.
    partner_state: String,
}

fn oracle(args: &OracleArgs) -> CliResult<()> {
    let src = args.problem.source()?.ok_or_else(|| CliError::config("give --problem, --mobius or --glass"))?;
    let model = src.load(&std::env::current_dir()?)?;
    let (s, h) = brute_force_ground_capped(&model, args.cap)?;
    let doc = OracleDoc { n: model.n(), h_min: h, partner_state: solve::spins(&s.flipped()), ground_state: solve::spins(&s) };
    emit(args.out.as_deref(), &stamped_json(&Stamp::of_args(args, 0)?, &doc)?)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Solve { manifest, out } => {
            let loaded = RunManifest::load(&manifest)?;
            let done = solve::solve(&loaded, out.as_deref())?;
            let s = &done.summary;
            println!(
                "{} runs x {} iterations: P(ground) = {:.3}, best H = {}, reference {} ({}); written to {}",
                s.runs,
                s.iterations,
                s.final_probability,
                s.best_h,
                s.reference_h,
                s.reference_method,
                done.dir.display()
            );
            Ok(())
        }
        Command::Oracle(args) => oracle(&args),
        Command::Report { kind, out } => emit(out.as_deref(), &report::report(&kind)?),
        Command::Calibrate(args) => {
            let s = calibrate::run(&args)?;
            println!(
                "f_mat {:.5} -> {:.5}, max phase error {:.2e} rad, {} measurements; written to {}",
                s.fidelity_uncalibrated,
                s.fidelity_calibrated,
                s.phase_error_max,
                s.measurements,
                args.out.display()
            );
            Ok(())
        }
        Command::Holo(args) => {
            let s = holo::run(&args)?;
            println!("{}x{} pattern for {} regions written to {}", s.cols, s.rows, s.n, args.out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
