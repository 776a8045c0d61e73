use std::path::PathBuf;

use clap::Args;
use photonic_ising::calibration::{
    calibrate, dft_benchmark, dft_matrix, CalibrationPlan, CalibrationTables, IntensityRig, MatrixRig, RigErrors,
};
use photonic_ising::optics::{CameraConfig, DetectorModel};
use serde::Serialize;

use crate::artifact::{ensure_dir, stamped_json, write_file, Stamp};
use crate::error::{CliError, CliResult};
use crate::report::read_json;

#[derive(Debug, Args, Serialize)]
pub struct CalibrateArgs {
    /// Number of spins (rig inputs and outputs).
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Seed of the injected gain, phase and input errors.
    #[arg(long)]
    pub inject: u64,
    /// Gain error band as `low high`.
    #[arg(long, num_args = 2, default_values_t = [0.7, 1.3])]
    pub band: Vec<f64>,
    /// Camera JSON; the default sCMOS profile when absent.
    #[arg(long, conflicts_with = "noiseless")]
    pub camera: Option<PathBuf>,
    /// Measure without camera noise.
    #[arg(long)]
    pub noiseless: bool,
    /// Exposure as a fraction of the full well for unit intensity.
    #[arg(long, default_value_t = 0.5)]
    pub exposure_fraction: f64,
    /// Calibration plan JSON (round counts, step, refinements).
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Seed of the camera noise.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for `tables.json` and `calibration.json`.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct CalibrationSummary {
    pub n: usize,
    pub fidelity_uncalibrated: f64,
    pub fidelity_calibrated: f64,
    /// Largest recovered phase error against the injected one (radians).
    pub phase_error_max: f64,
    pub unmeasurable: Vec<(usize, usize)>,
    pub slm1_residuals: Vec<f64>,
    pub slm0_spread: Vec<f64>,
    /// SLM1 entries that should carry light but measured none.
    pub slm1_flagged: Vec<(usize, usize)>,
    /// SLM0 inputs that measured no light.
    pub slm0_flagged: Vec<usize>,
    pub measurements: usize,
}

pub fn run(args: &CalibrateArgs) -> CliResult<CalibrationSummary> {
    if args.band.len() != 2 {
        return Err(CliError::config("--band takes two values"));
    }
    if !(args.exposure_fraction > 0.0 && args.exposure_fraction.is_finite()) {
        return Err(CliError::config("--exposure-fraction must be positive"));
    }
    let stamp = Stamp::of_args(args, args.seed)?;
    let plan: CalibrationPlan = match &args.plan {
        Some(p) => read_json(p)?,
        None => CalibrationPlan::default(),
    };
    let errors = RigErrors::random(args.n, (args.band[0], args.band[1]), args.inject)?;
    let camera = if args.noiseless {
        None
    } else {
        let cfg: CameraConfig = match &args.camera {
            Some(p) => read_json(p)?,
            None => CameraConfig::default(),
        };
        Some(DetectorModel::new(cfg)?)
    };
    let build = |seed: u64| -> CliResult<MatrixRig> {
        let rig = MatrixRig::new(errors.clone(), true)?;
        Ok(match &camera {
            Some(det) => rig.with_camera(det.clone(), args.exposure_fraction * det.full_well(), seed),
            None => rig,
        })
    };
    let w = dft_matrix(args.n);

    let mut raw = build(args.seed.wrapping_mul(2))?;
    raw.set_splitting(&w)?;
    let f_raw = dft_benchmark(&mut raw)?;

    let mut rig = build(args.seed.wrapping_mul(2).wrapping_add(1))?;
    let report = calibrate(&mut rig, &w, &plan)?;
    rig.set_splitting(&report.programmed)?;
    rig.set_input_gains(&report.tables.slm0_input)?;
    let f_cal = dft_benchmark(&mut rig)?;

    let mut worst: f64 = 0.0;
    for i in 0..args.n {
        for j in 0..args.n - 1 {
            if report.phase.unmeasurable.contains(&(i, j)) {
                continue;
            }
            let truth = errors.phases[(i, 0)] - errors.phases[(i, j + 1)];
            worst = worst.max(wrap(report.phase.delta_phi[(i, j)] - truth).abs());
        }
    }

    let summary = CalibrationSummary {
        n: args.n,
        fidelity_uncalibrated: f_raw,
        fidelity_calibrated: f_cal,
        phase_error_max: worst,
        unmeasurable: report.phase.unmeasurable.clone(),
        slm1_residuals: report.slm1.residuals.clone(),
        slm0_spread: report.slm0.spread.clone(),
        slm1_flagged: report.slm1.flagged.clone(),
        slm0_flagged: report.slm0.flagged.clone(),
        measurements: rig.measurements(),
    };
    let dir = ensure_dir(&args.out)?;
    write_file(&dir.join("tables.json"), stamped_json(&stamp, &TablesDoc { tables: &report.tables })?.as_bytes())?;
    write_file(&dir.join("calibration.json"), stamped_json(&stamp, &summary)?.as_bytes())?;
    Ok(summary)
}

#[derive(Serialize)]
struct TablesDoc<'a> {
    tables: &'a CalibrationTables,
}

fn wrap(x: f64) -> f64 {
    let t = std::f64::consts::TAU;
    x - t * (x / t).round()
}
