use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::budget::ELEMENTARY_CHARGE;
use crate::error::{invalid, Result};

/// Camera parameters as stored on disk (SI units, electrons for charge).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    pub full_well_electrons: f64,
    pub adc_bits: u32,
    pub dark_current_amperes: f64,
    pub exposure_seconds: f64,
    pub readout_noise_electrons: f64,
    #[serde(default = "default_frames")]
    pub frames_averaged: u32,
    /// Offset kept below zero signal so that negative noise excursions survive
    /// offset subtraction; readings clamp to `[−black_level, full_well]`.
    #[serde(default)]
    pub black_level_electrons: f64,
    #[serde(default = "yes")]
    pub shot_noise: bool,
    #[serde(default = "yes")]
    pub quantize: bool,
}

fn default_frames() -> u32 {
    3
}

fn yes() -> bool {
    true
}

impl Default for CameraConfig {
    /// sCMOS profile: 6×10⁵ e⁻ well, 14-bit ADC, 60 fA dark current, 16.7 ms, 1000 e⁻ readout.
    fn default() -> Self {
        Self {
            full_well_electrons: 6.0e5,
            adc_bits: 14,
            dark_current_amperes: 60e-15,
            exposure_seconds: 16.7e-3,
            readout_noise_electrons: 1000.0,
            frames_averaged: 3,
            black_level_electrons: 5000.0,
            shot_noise: true,
            quantize: true,
        }
    }
}

impl CameraConfig {
    /// No noise, no quantization.
    pub fn noiseless(full_well_electrons: f64) -> Self {
        Self {
            full_well_electrons,
            adc_bits: 16,
            dark_current_amperes: 0.0,
            exposure_seconds: 1.0,
            readout_noise_electrons: 0.0,
            frames_averaged: 1,
            black_level_electrons: 0.0,
            shot_noise: false,
            quantize: false,
        }
    }
}

/// Validated camera with derived quantization and dark noise.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorModel {
    config: CameraConfig,
    delta_q: f64,
    delta_d: f64,
}

impl DetectorModel {
    pub fn new(config: CameraConfig) -> Result<Self> {
        let c = &config;
        if !(c.full_well_electrons > 0.0 && c.full_well_electrons.is_finite()) {
            return Err(invalid("full_well_electrons must be positive"));
        }
        if !(1..=52).contains(&c.adc_bits) {
            return Err(invalid("adc_bits must be in 1..=52"));
        }
        for (name, v) in [
            ("dark_current_amperes", c.dark_current_amperes),
            ("exposure_seconds", c.exposure_seconds),
            ("readout_noise_electrons", c.readout_noise_electrons),
            ("black_level_electrons", c.black_level_electrons),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be finite and >= 0")));
            }
        }
        if c.frames_averaged == 0 {
            return Err(invalid("frames_averaged must be >= 1"));
        }
        let delta_q = c.full_well_electrons / 2f64.powi(c.adc_bits as i32 - 1) / 12f64.sqrt();
        let delta_d = (c.dark_current_amperes * c.exposure_seconds / ELEMENTARY_CHARGE).sqrt();
        Ok(Self { config, delta_q, delta_d })
    }

    pub fn scmos_default() -> Self {
        Self::new(CameraConfig::default()).expect("default camera is valid")
    }

    pub fn noiseless(full_well: f64) -> Result<Self> {
        Self::new(CameraConfig::noiseless(full_well))
    }

    pub fn config(&self) -> &CameraConfig {
        &self.config
    }

    pub fn full_well(&self) -> f64 {
        self.config.full_well_electrons
    }

    pub fn readout_noise(&self) -> f64 {
        self.config.readout_noise_electrons
    }

    /// Quantization noise `(C_well/2^(B−1))/√12`.
    pub fn delta_q(&self) -> f64 {
        self.delta_q
    }

    /// Dark noise `√(i_d·Δt/e)`.
    pub fn delta_d(&self) -> f64 {
        self.delta_d
    }

    pub fn frames(&self) -> u32 {
        self.config.frames_averaged
    }

    /// Per-frame noise σ at mean signal `mu` electrons.
    pub fn frame_sigma(&self, mu: f64) -> f64 {
        let shot = if self.config.shot_noise { mu.max(0.0) } else { 0.0 };
        (self.config.readout_noise_electrons.powi(2) + self.delta_d.powi(2) + shot).sqrt()
    }

    pub fn adc_step(&self) -> f64 {
        self.config.full_well_electrons / 2f64.powi(self.config.adc_bits as i32)
    }

    pub fn with_frames(&self, frames: u32) -> Result<Self> {
        Self::new(CameraConfig { frames_averaged: frames, ..self.config.clone() })
    }
}

/// Electron readings for one exposure.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub electrons: Vec<f64>,
    /// Some expected signal exceeded the full well.
    pub saturated: bool,
}

/// Converts unit intensities to noisy, clamped, quantized electron readings.
pub fn detect<R: Rng + ?Sized>(
    intensities: &[f64],
    det: &DetectorModel,
    exposure_scale: f64,
    rng: &mut R,
) -> Result<Detection> {
    if !(exposure_scale > 0.0 && exposure_scale.is_finite()) {
        return Err(invalid("exposure_scale must be positive"));
    }
    let cfg = det.config();
    let full = cfg.full_well_electrons;
    let floor = -cfg.black_level_electrons;
    let frames = f64::from(cfg.frames_averaged);
    let step = det.adc_step();
    let mut saturated = false;
    let mut electrons = Vec::with_capacity(intensities.len());
    for &i in intensities {
        if !(i >= 0.0 && i.is_finite()) {
            return Err(invalid(format!("intensity {i} is not a finite nonnegative value")));
        }
        let mu = exposure_scale * i;
        saturated |= mu > full;
        let sigma = det.frame_sigma(mu) / frames.sqrt();
        let z: f64 = if sigma > 0.0 { StandardNormal.sample(rng) } else { 0.0 };
        let mut v = (mu + sigma * z).clamp(floor, full);
        if cfg.quantize {
            v = (v / step).round() * step;
        }
        electrons.push(v);
    }
    Ok(Detection { electrons, saturated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn derived_noise_terms() {
        let d = DetectorModel::scmos_default();
        assert!((d.delta_q() - 21.14).abs() < 0.01);
        assert!((d.delta_d() - 79.14).abs() < 0.01);
        assert!((d.frame_sigma(6e5) - 1267.4).abs() < 0.5);
        assert!((d.frame_sigma(0.0) - 1003.1).abs() < 0.5);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(DetectorModel::new(CameraConfig { adc_bits: 0, ..CameraConfig::default() }).is_err());
        assert!(DetectorModel::new(CameraConfig { frames_averaged: 0, ..CameraConfig::default() }).is_err());
        assert!(DetectorModel::new(CameraConfig { readout_noise_electrons: -1.0, ..CameraConfig::default() }).is_err());
    }

    #[test]
    fn saturation_flag_and_clamp() {
        let d = DetectorModel::noiseless(100.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = detect(&[1.0, 3.0], &d, 50.0, &mut rng).unwrap();
        assert!(out.saturated);
        assert_eq!(out.electrons, vec![50.0, 100.0]);
        assert!(detect(&[-1.0], &d, 1.0, &mut rng).is_err());
    }

    #[test]
    fn shot_noise_variance() {
        let cfg = CameraConfig {
            full_well_electrons: 1e6,
            readout_noise_electrons: 0.0,
            dark_current_amperes: 0.0,
            frames_averaged: 1,
            quantize: false,
            ..CameraConfig::default()
        };
        let d = DetectorModel::new(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let samples: Vec<f64> = (0..1_000_000)
            .map(|_| detect(&[1.0], &d, 1e4, &mut rng).unwrap().electrons[0])
            .collect();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
        assert!((var / 1e4 - 1.0).abs() < 0.01, "variance {var}");
        // unbiased: 3σ/√N with σ = 100
        assert!((mean - 1e4).abs() < 3.0 * 100.0 / 1000.0);
    }

    #[test]
    fn frame_averaging_scales_sigma() {
        let d1 = DetectorModel::scmos_default().with_frames(1).unwrap();
        let d3 = DetectorModel::scmos_default().with_frames(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let std = |d: &DetectorModel, rng: &mut ChaCha8Rng| {
            let s: Vec<f64> = (0..100_000).map(|_| detect(&[0.5], d, 1e5, rng).unwrap().electrons[0]).collect();
            let m = s.iter().sum::<f64>() / s.len() as f64;
            (s.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (s.len() - 1) as f64).sqrt()
        };
        let ratio = std(&d1, &mut rng) / std(&d3, &mut rng);
        assert!((ratio - 3f64.sqrt()).abs() < 0.02, "ratio {ratio}");
    }
}
