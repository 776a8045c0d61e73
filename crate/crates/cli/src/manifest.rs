use std::path::{Path, PathBuf};

use photonic_ising::calibration::CalibrationPlan;
use photonic_ising::holography::RigConfig;
use photonic_ising::ising::{mobius_ladder, random_glass, IsingModel, ProblemFile};
use photonic_ising::optics::CameraConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Where the couplings come from: a JSON problem file or a built-in generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemSource {
    File(PathBuf),
    Generator(Generator),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Generator {
    MobiusLadder { n: usize },
    RandomGlass { n: usize, seed: u64 },
}

impl ProblemSource {
    /// Relative paths resolve against `base`.
    pub fn load(&self, base: &Path) -> CliResult<IsingModel> {
        match self {
            ProblemSource::File(p) => {
                let path = if p.is_absolute() { p.clone() } else { base.join(p) };
                if !path.is_file() {
                    return Err(CliError::config(format!("problem file {} does not exist", path.display())));
                }
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
                let file: ProblemFile = serde_json::from_str(&text).map_err(|e| {
                    CliError::config(format!(
                        "{} is not a problem file ({e}); expected {{\"n\": N, \"edges\": [[i, j, w], ...]}} or {{\"matrix\": [[...], ...]}}",
                        path.display()
                    ))
                })?;
                Ok(file.to_model()?)
            }
            ProblemSource::Generator(Generator::MobiusLadder { n }) => Ok(mobius_ladder(*n)?),
            ProblemSource::Generator(Generator::RandomGlass { n, seed }) => Ok(random_glass(*n, *seed)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Exact,
    Ideal,
    Noisy,
    Physical,
}

/// Schedule; `t0` and `alpha` fall back to their defaults when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub n_step: usize,
    pub n_temp: usize,
    pub eta: f64,
    /// Initial temperature in model units; the noisy tier converts it to electrons.
    #[serde(default)]
    pub t0: Option<f64>,
    /// Multiplier on the random-probe default temperature, used when `t0` is absent.
    #[serde(default)]
    pub t0_factor: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
}

/// Electrons per unit intensity for the camera tiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exposure {
    Fixed(f64),
    Rule(ExposureRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExposureRule {
    /// No state can saturate any pixel.
    Unsaturated,
    /// Brightest beam of the brute-force ground state at full well.
    DominantGround,
}

impl Default for Exposure {
    fn default() -> Self {
        Exposure::Rule(ExposureRule::Unsaturated)
    }
}

/// Physical-tier settings; `rig` defaults to the built-in toy layout for `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSettings {
    #[serde(default)]
    pub rig: Option<RigConfig>,
    #[serde(default = "CalibrationPlan::diffraction")]
    pub calibration: CalibrationPlan,
}

impl Default for PhysicalSettings {
    fn default() -> Self {
        Self { rig: None, calibration: CalibrationPlan::diffraction() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub problem: ProblemSource,
    pub tier: Tier,
    pub anneal: Schedule,
    pub runs: usize,
    pub seed: u64,
    pub output: PathBuf,
    /// Camera for the noisy tier (default camera when absent) and, if given, the physical tier.
    #[serde(default)]
    pub camera: Option<CameraConfig>,
    #[serde(default)]
    pub exposure: Exposure,
    #[serde(default)]
    pub physical: Option<PhysicalSettings>,
    /// Independent exact runs used as the reference when brute force is out of reach.
    #[serde(default = "default_reference_runs")]
    pub reference_runs: usize,
    /// Worker threads; all cores when absent.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_reference_runs() -> usize {
    200
}

/// A parsed manifest with the raw bytes it was read from.
pub struct LoadedManifest {
    pub manifest: RunManifest,
    pub bytes: Vec<u8>,
    pub base: PathBuf,
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<LoadedManifest> {
        let bytes = std::fs::read(path).map_err(|e| CliError::config(format!("cannot read manifest {}: {e}", path.display())))?;
        let manifest: RunManifest = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::config(format!("manifest {} is invalid: {e}", path.display())))?;
        manifest.validate()?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(LoadedManifest { manifest, bytes, base })
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.runs == 0 {
            return Err(CliError::config("runs must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(CliError::config("threads must be at least 1"));
        }
        if let Some(f) = self.anneal.t0_factor {
            if !(f > 0.0 && f.is_finite()) {
                return Err(CliError::config("t0_factor must be positive"));
            }
        }
        if self.anneal.t0.is_some() && self.anneal.t0_factor.is_some() {
            return Err(CliError::config("give either t0 or t0_factor, not both"));
        }
        if let Exposure::Fixed(c) = self.exposure {
            if !(c > 0.0 && c.is_finite()) {
                return Err(CliError::config("exposure must be positive"));
            }
        }
        if self.tier != Tier::Physical && self.physical.is_some() {
            return Err(CliError::config("a physical section needs tier \"physical\""));
        }
        if self.tier == Tier::Physical && self.camera.is_some() && !matches!(self.exposure, Exposure::Fixed(_)) {
            return Err(CliError::config("the physical tier with a camera needs a numeric exposure"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_and_path_sources_parse() {
        let g: ProblemSource = serde_json::from_str(r#"{"generator": "random-glass", "n": 10, "seed": 4}"#).unwrap();
        assert_eq!(g, ProblemSource::Generator(Generator::RandomGlass { n: 10, seed: 4 }));
        let p: ProblemSource = serde_json::from_str(r#""problems/m1.json""#).unwrap();
        assert_eq!(p, ProblemSource::File(PathBuf::from("problems/m1.json")));
    }

    #[test]
    fn exposure_forms() {
        let a: Exposure = serde_json::from_str("1234.5").unwrap();
        assert_eq!(a, Exposure::Fixed(1234.5));
        let b: Exposure = serde_json::from_str(r#""dominant-ground""#).unwrap();
        assert_eq!(b, Exposure::Rule(ExposureRule::DominantGround));
        assert!(serde_json::from_str::<Exposure>(r#""brightest""#).is_err());
    }

    #[test]
    fn unknown_manifest_fields_rejected() {
        let text = r#"{"problem": {"generator": "mobius-ladder", "n": 8}, "tier": "exact",
            "anneal": {"n_step": 5, "n_temp": 5, "eta": 0.9}, "runs": 2, "seed": 1, "output": "out", "colour": 1}"#;
        assert!(serde_json::from_str::<RunManifest>(text).is_err());
    }
}
