//! Phase and amplitude calibration against intensity-only rigs.
//!
//! Every procedure here talks to the rig through [`IntensityRig`] and never
//! looks at the rig's internal error model.

mod matrix_rig;
mod procedures;

pub use matrix_rig::{MatrixRig, RigErrors};
pub use procedures::{
    amplitude_calibrate_slm0, amplitude_calibrate_slm1, calibrate, dft_benchmark, dft_matrix, fit_intensity_scale,
    phase_calibrate, phase_refine, CalibrationPlan, CalibrationReport, CalibrationTables, PhaseCalibration,
    Slm0Calibration, Slm1Calibration,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;

/// Programmable transform measured by intensities only.
///
/// `measure(x)` returns one intensity per output. An entry `x_j = 0`
/// deactivates input region `j`; a nonzero entry passes that region with
/// factor `x_j` (phase-only rigs use only `arg(x_j)`).
pub trait IntensityRig {
    fn dim(&self) -> usize;
    /// Programs the splitting matrix (rows: outputs, columns: inputs).
    fn set_splitting(&mut self, programmed: &DMatrix<Complex64>) -> Result<()>;
    /// Programs per-input amplitudes.
    fn set_input_gains(&mut self, gains: &[f64]) -> Result<()>;
    fn measure(&mut self, input: &[Complex64]) -> Result<Vec<f64>>;
}
