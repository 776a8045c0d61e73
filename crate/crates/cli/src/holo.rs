use std::path::PathBuf;

use clap::{Args, ValueEnum};
use nalgebra::DMatrix;
use photonic_ising::holography::{
    ideal_modulation, phase_only_project, physical_target, ModulationOptions, ModulationRole, OpticalGeometry, RigConfig,
    SlmGrid, Weights,
};
use photonic_ising::ising::spectral_transform;
use photonic_ising::Complex64;
use serde::Serialize;

use crate::artifact::{stamped_json, write_file, Stamp};
use crate::error::{CliError, CliResult};
use crate::report::read_json;
use crate::ProblemArgs;

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    /// SLM0: incident beam to the SLM1 regions.
    Split0,
    /// SLM1: every region fans out to every SLM2 region.
    Split1,
    /// SLM2: regions recombine onto the axis.
    Recombine2,
}

#[derive(Debug, Args, Serialize)]
pub struct HoloArgs {
    #[arg(long, value_enum)]
    pub role: Role,
    /// Geometry JSON (an optical geometry object).
    #[arg(long, conflicts_with = "toy")]
    pub geometry: Option<PathBuf>,
    /// Built-in toy layout for this many spins.
    #[arg(long)]
    pub toy: Option<usize>,
    /// SLM1 weights from this problem's transform; all ones otherwise.
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// SLM1 region signs, e.g. `+-+-`.
    #[arg(long)]
    pub spins: Option<String>,
    /// Adds a 4-pixel blazed grating over the pattern.
    #[arg(long)]
    pub blaze: bool,
    /// Output image (`.png` or `.pgm`); a `.json` sidecar is written next to it.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct PatternSidecar {
    pub role: Role,
    pub rows: usize,
    pub cols: usize,
    pub pixel_pitch: f64,
    pub wavelength: f64,
    pub n: usize,
    pub image: String,
}

pub fn run(args: &HoloArgs) -> CliResult<PatternSidecar> {
    let geometry: OpticalGeometry = match (&args.geometry, args.toy) {
        (Some(p), _) => read_json(p)?,
        (None, Some(n)) => RigConfig::toy(n)?.geometry,
        (None, None) => return Err(CliError::config("give --geometry or --toy")),
    };
    geometry.validate()?;
    let n = geometry.n();
    let stamp = Stamp::of_args(args, 0)?;
    let grid = SlmGrid::of(&geometry);

    let matrix = match args.problem.source()? {
        Some(src) => {
            let model = src.load(&std::env::current_dir()?)?;
            if model.n() != n {
                return Err(CliError::config(format!("problem has {} spins, geometry has {n} regions", model.n())));
            }
            physical_target(&spectral_transform(&model, None)?)
        }
        None => DMatrix::from_element(n, n, Complex64::new(1.0, 0.0)),
    };
    let ones = vec![Complex64::new(1.0, 0.0); n];
    let factors = match &args.spins {
        Some(s) => Some(parse_signs(s, n)?),
        None => None,
    };
    let (role, weights) = match args.role {
        Role::Split0 => (ModulationRole::Split0, Weights::Input(&ones)),
        Role::Split1 => (ModulationRole::Split1, Weights::Matrix(&matrix)),
        Role::Recombine2 => (ModulationRole::Recombine2, Weights::Matrix(&matrix)),
    };
    let options = ModulationOptions { global_blaze: args.blaze };
    let ideal = ideal_modulation(role, &geometry, grid, weights, factors.as_deref(), options)?;
    let holo = phase_only_project(&ideal, geometry.pixel_pitch)?;

    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    holo.save_image(&args.out)?;
    let sidecar = PatternSidecar {
        role: args.role,
        rows: grid.rows,
        cols: grid.cols,
        pixel_pitch: geometry.pixel_pitch,
        wavelength: geometry.wavelength,
        n,
        image: args.out.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
    };
    write_file(&args.out.with_extension("json"), stamped_json(&stamp, &sidecar)?.as_bytes())?;
    Ok(sidecar)
}

fn parse_signs(s: &str, n: usize) -> CliResult<Vec<Complex64>> {
    let v: Vec<Complex64> = s
        .chars()
        .map(|c| match c {
            '+' => Ok(Complex64::new(1.0, 0.0)),
            '-' => Ok(Complex64::new(-1.0, 0.0)),
            other => Err(CliError::config(format!("spin sign '{other}' is not + or -"))),
        })
        .collect::<CliResult<_>>()?;
    if v.len() != n {
        return Err(CliError::config(format!("{} spin signs for {n} regions", v.len())));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_strings() {
        assert_eq!(parse_signs("+-", 2).unwrap()[1], Complex64::new(-1.0, 0.0));
        assert!(parse_signs("+x", 2).is_err());
        assert!(parse_signs("+", 2).is_err());
    }
}
