use std::path::PathBuf;

use clap::{Args, Subcommand};
use photonic_ising::holography::{beam_geometry, layout_spins, BeamGeometry, LayoutPlan};
use photonic_ising::optics::{noise_budget, perf_report, CameraConfig, DetectorModel, NoiseReport, PerfModel, PerfReport};
use serde::{Deserialize, Serialize};

use crate::artifact::{stamped_json, Stamp};
use crate::error::{CliError, CliResult};

#[derive(Debug, Subcommand, Serialize)]
pub enum ReportKind {
    /// Camera noise budget and Hamiltonian resolution.
    Noise(NoiseArgs),
    /// FLOP count, rate and energy per FLOP.
    Perf(PerfArgs),
    /// Gaussian beam sizes and spin capacity of an SLM layout.
    Geometry(GeometryArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct NoiseArgs {
    /// Camera JSON; the default sCMOS profile when absent.
    #[arg(long)]
    pub camera: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Ground-state signal magnitude in electrons.
    #[arg(long, default_value_t = 3e5)]
    pub h0: f64,
    /// Minimum Hamiltonian of the problem (model units).
    #[arg(long, default_value_t = -26.0, allow_negative_numbers = true)]
    pub h_min: f64,
    /// Smallest Hamiltonian gap above the minimum (model units).
    #[arg(long, default_value_t = 2.0)]
    pub delta_h_min: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct PerfArgs {
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    /// Timing JSON with `t_p`, `t_u`, `t_d`, `t_e` (seconds) and `power` (watts).
    #[arg(long)]
    pub timings: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GeometryArgs {
    #[arg(long, default_value_t = 1550e-9)]
    pub wavelength: f64,
    /// Distance from the waist to each SLM (metres).
    #[arg(long, default_value_t = 0.377)]
    pub z_half: f64,
    #[arg(long, num_args = 2, default_values_t = [1920, 1080])]
    pub slm_pixels: Vec<usize>,
    #[arg(long, default_value_t = 8e-6)]
    pub pixel_pitch: f64,
    #[arg(long, default_value_t = 950e-6)]
    pub region_radius: f64,
    /// SLM1 to SLM2 distance; twice `z_half` when absent.
    #[arg(long)]
    pub l12: Option<f64>,
}

#[derive(Serialize)]
struct NoiseDoc {
    kind: &'static str,
    camera: CameraConfig,
    #[serde(flatten)]
    report: NoiseReport,
}

#[derive(Serialize)]
struct PerfDoc {
    kind: &'static str,
    timings: PerfModel,
    #[serde(flatten)]
    report: PerfReport,
}

#[derive(Serialize)]
struct GeometryDoc {
    kind: &'static str,
    plan: LayoutPlan,
    #[serde(flatten)]
    beam: BeamGeometry,
    capacity: usize,
}

pub fn report(kind: &ReportKind) -> CliResult<String> {
    let stamp = Stamp::of_args(kind, 0)?;
    match kind {
        ReportKind::Noise(a) => {
            let camera: CameraConfig = match &a.camera {
                Some(p) => read_json(p)?,
                None => CameraConfig::default(),
            };
            let det = DetectorModel::new(camera.clone())?;
            let report = noise_budget(&det, a.n, a.h0, a.h_min, a.delta_h_min)?;
            stamped_json(&stamp, &NoiseDoc { kind: "noise", camera, report })
        }
        ReportKind::Perf(a) => {
            let timings: PerfModel = match &a.timings {
                Some(p) => read_json(p)?,
                None => PerfModel::default(),
            };
            let report = perf_report(a.n, &timings)?;
            stamped_json(&stamp, &PerfDoc { kind: "perf", timings, report })
        }
        ReportKind::Geometry(a) => {
            let beam = beam_geometry(a.wavelength, a.z_half)?;
            let plan = LayoutPlan {
                slm_pixels: [a.slm_pixels[0], a.slm_pixels[1]],
                pixel_pitch: a.pixel_pitch,
                region_radius: a.region_radius,
                wavelength: a.wavelength,
                l12: a.l12.unwrap_or(2.0 * a.z_half),
            };
            let capacity = layout_spins(0, &plan)?.capacity;
            stamped_json(&stamp, &GeometryDoc { kind: "geometry", plan, beam, capacity })
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &PathBuf) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{} is invalid: {e}", path.display())))
}
