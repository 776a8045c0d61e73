use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::IntensityRig;
use crate::error::{dim, invalid, Result};
use crate::optics::{detect, DetectorModel};

/// Injected systematic errors: `actual_ij = g_ij·e^{iφ_ij}·programmed_ij·b_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RigErrors {
    pub gains: DMatrix<f64>,
    pub phases: DMatrix<f64>,
    pub input: Vec<f64>,
}

impl RigErrors {
    pub fn none(n: usize) -> Self {
        Self { gains: DMatrix::from_element(n, n, 1.0), phases: DMatrix::zeros(n, n), input: vec![1.0; n] }
    }

    /// Gains and input errors uniform in `band`, phases uniform in `(−π, π]`.
    pub fn random(n: usize, band: (f64, f64), seed: u64) -> Result<Self> {
        if !(band.0 > 0.0 && band.1 >= band.0 && band.1.is_finite()) {
            return Err(invalid("gain band must be positive and ordered"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| band.0 + (band.1 - band.0) * rng.random::<f64>();
        let gains = DMatrix::from_fn(n, n, |_, _| draw(&mut rng));
        let input = (0..n).map(|_| draw(&mut rng)).collect();
        let phases = DMatrix::from_fn(n, n, |_, _| std::f64::consts::PI * (1.0 - 2.0 * rng.random::<f64>()));
        Ok(Self { gains, phases, input })
    }
}

/// Matrix-level rig with systematic errors and an optional camera.
///
/// With `phase_only_splitter` each programmed column is divided by its norm,
/// as a phase-only splitter conserves the power of its input beam; column
/// scale is then only reachable through the input gains.
#[derive(Debug, Clone)]
pub struct MatrixRig {
    errors: RigErrors,
    programmed: DMatrix<Complex64>,
    input_gains: Vec<f64>,
    phase_only_splitter: bool,
    camera: Option<(DetectorModel, f64, ChaCha8Rng)>,
    measurements: usize,
}

impl MatrixRig {
    pub fn new(errors: RigErrors, phase_only_splitter: bool) -> Result<Self> {
        let n = errors.gains.nrows();
        if errors.gains.shape() != (n, n) || errors.phases.shape() != (n, n) || errors.input.len() != n {
            return Err(dim("rig error tables must be n x n with n input errors"));
        }
        if errors.gains.iter().chain(&errors.input).any(|g| !(g.is_finite() && *g >= 0.0))
            || errors.phases.iter().any(|p| !p.is_finite())
        {
            return Err(invalid("rig errors must be finite and gains nonnegative"));
        }
        Ok(Self {
            errors,
            programmed: DMatrix::from_element(n, n, Complex64::new(1.0, 0.0)),
            input_gains: vec![1.0; n],
            phase_only_splitter,
            camera: None,
            measurements: 0,
        })
    }

    /// Adds camera noise; `exposure` converts unit intensity to electrons.
    /// Measurements are returned divided by `exposure`.
    pub fn with_camera(mut self, detector: DetectorModel, exposure: f64, seed: u64) -> Self {
        self.camera = Some((detector, exposure, ChaCha8Rng::seed_from_u64(seed)));
        self
    }

    /// Effective transform (ground truth; for verification only).
    pub fn actual_matrix(&self) -> DMatrix<Complex64> {
        let n = self.errors.gains.nrows();
        let norms: Vec<f64> = (0..n)
            .map(|c| {
                if self.phase_only_splitter {
                    self.programmed.column(c).norm()
                } else {
                    1.0
                }
            })
            .collect();
        DMatrix::from_fn(n, n, |r, c| {
            if norms[c] == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::from_polar(self.errors.gains[(r, c)], self.errors.phases[(r, c)]) * self.programmed[(r, c)]
                / norms[c]
                * self.errors.input[c]
                * self.input_gains[c]
        })
    }

    pub fn measurements(&self) -> usize {
        self.measurements
    }
}

impl IntensityRig for MatrixRig {
    fn dim(&self) -> usize {
        self.errors.gains.nrows()
    }

    fn set_splitting(&mut self, programmed: &DMatrix<Complex64>) -> Result<()> {
        if programmed.shape() != self.programmed.shape() {
            return Err(dim("programmed matrix shape differs from the rig"));
        }
        self.programmed = programmed.clone();
        Ok(())
    }

    fn set_input_gains(&mut self, gains: &[f64]) -> Result<()> {
        if gains.len() != self.dim() {
            return Err(dim("input gain count differs from the rig"));
        }
        if gains.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(invalid("input gains must be finite and nonnegative"));
        }
        self.input_gains = gains.to_vec();
        Ok(())
    }

    fn measure(&mut self, input: &[Complex64]) -> Result<Vec<f64>> {
        if input.len() != self.dim() {
            return Err(dim("input length differs from the rig"));
        }
        self.measurements += 1;
        let a = self.actual_matrix();
        let x = nalgebra::DVector::from_column_slice(input);
        let i: Vec<f64> = (a * x).iter().map(|v| v.norm_sqr()).collect();
        match &mut self.camera {
            None => Ok(i),
            Some((det, exposure, rng)) => {
                let d = detect(&i, det, *exposure, rng)?;
                Ok(d.electrons.into_iter().map(|e| e / *exposure).collect())
            }
        }
    }
}
