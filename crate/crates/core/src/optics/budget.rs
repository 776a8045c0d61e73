use serde::{Deserialize, Serialize};

use super::detector::DetectorModel;
use crate::error::{invalid, Result};

/// Elementary charge as used for the dark-noise estimate (C).
pub const ELEMENTARY_CHARGE: f64 = 1.6e-19;

/// Ground-state noise budget: one beam at full well, `n − 1` dark beams, single frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub n: usize,
    pub delta_q: f64,
    pub delta_d: f64,
    pub delta_r: f64,
    pub delta_p_max: f64,
    pub delta_i_dark: f64,
    pub delta_i_max: f64,
    pub h0: f64,
    pub delta_h: f64,
    /// `delta_h` after averaging the configured number of frames.
    pub delta_h_averaged: f64,
    pub snr_db: f64,
    pub resolution: f64,
    pub h_min: f64,
    pub delta_h_min: f64,
    pub relative_interval: f64,
    pub resolvable: bool,
}

pub fn noise_budget(det: &DetectorModel, n: usize, h0: f64, h_min: f64, delta_h_min: f64) -> Result<NoiseReport> {
    if h0 == 0.0 || !h0.is_finite() {
        return Err(invalid("h0 must be finite and nonzero"));
    }
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if h_min == 0.0 {
        return Err(invalid("h_min must be nonzero"));
    }
    let dark = det.frame_sigma(0.0);
    let bright = det.frame_sigma(det.full_well());
    let delta_h = 0.5 * ((n as f64 - 1.0) * dark * dark + bright * bright).sqrt();
    let resolution = (delta_h / h0).abs();
    let relative_interval = (delta_h_min / h_min).abs();
    Ok(NoiseReport {
        n,
        delta_q: det.delta_q(),
        delta_d: det.delta_d(),
        delta_r: det.readout_noise(),
        delta_p_max: det.full_well().sqrt(),
        delta_i_dark: dark,
        delta_i_max: bright,
        h0,
        delta_h,
        delta_h_averaged: delta_h / f64::from(det.frames()).sqrt(),
        snr_db: 20.0 * (h0.abs() / delta_h).log10(),
        resolution,
        h_min,
        delta_h_min,
        relative_interval,
        resolvable: relative_interval > resolution,
    })
}

/// Iteration timing and power draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfModel {
    pub t_p: f64,
    pub t_u: f64,
    pub t_d: f64,
    pub t_e: f64,
    pub power: f64,
}

impl Default for PerfModel {
    /// 5 ns propagation, 0.15 s SLM update, 0.17 s camera, 16 W.
    fn default() -> Self {
        Self { t_p: 5e-9, t_u: 0.15, t_d: 0.17, t_e: 0.0, power: 16.0 }
    }
}

impl PerfModel {
    pub fn t_iter(&self) -> f64 {
        self.t_p + self.t_u + self.t_d + self.t_e
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfReport {
    pub n: usize,
    pub flops: u64,
    pub t_iter: f64,
    pub rate: f64,
    pub e_ff: f64,
}

/// `F = 2n² + 2n`, `rate = F/t_iter`, `e_ff = power/rate`.
pub fn perf_report(n: usize, perf: &PerfModel) -> Result<PerfReport> {
    let parts = [perf.t_p, perf.t_u, perf.t_d, perf.t_e, perf.power];
    if parts.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(invalid("timings and power must be finite and >= 0"));
    }
    let t_iter = perf.t_iter();
    if t_iter <= 0.0 {
        return Err(invalid("iteration time must be positive"));
    }
    let flops = 2 * (n as u64).pow(2) + 2 * n as u64;
    let rate = flops as f64 / t_iter;
    Ok(PerfReport { n, flops, t_iter, rate, e_ff: perf.power / rate })
}
