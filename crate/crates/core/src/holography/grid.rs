use ndarray::{Array2, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{dim, invalid, Result};

/// Complex field sampled on a uniform grid centered on the optical axis.
///
/// `samples[[row, col]]` sits at `(x, y) = (x(col), y(row))`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub samples: Array2<Complex64>,
    pub dx: f64,
    pub dy: f64,
}

/// Metadata written next to binary field dumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub schema_version: u32,
    /// `[rows, cols]`.
    pub shape: [usize; 2],
    pub dx: f64,
    pub dy: f64,
    pub wavelength: f64,
    /// Row-major little-endian `f64` pairs (re, im).
    pub layout: String,
}

impl FieldGrid {
    pub fn new(samples: Array2<Complex64>, dx: f64, dy: f64) -> Result<Self> {
        let (ny, nx) = samples.dim();
        if ny < 2 || nx < 2 {
            return Err(dim(format!("grid must be at least 2x2, got {ny}x{nx}")));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(invalid("sampling intervals must be positive"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(invalid("field has non-finite samples"));
        }
        Ok(Self { samples, dx, dy })
    }

    pub fn zeros(ny: usize, nx: usize, dx: f64, dy: f64) -> Result<Self> {
        Self::new(Array2::zeros((ny, nx)), dx, dy)
    }

    /// `exp(−|r − c|²/w²)` sampled on the grid.
    pub fn gaussian(ny: usize, nx: usize, dx: f64, dy: f64, waist: f64, center: (f64, f64)) -> Result<Self> {
        if !(waist > 0.0) {
            return Err(invalid("waist must be positive"));
        }
        let mut g = Self::zeros(ny, nx, dx, dy)?;
        let (xs, ys) = (g.xs(), g.ys());
        g.samples.indexed_iter_mut().for_each(|((r, c), v)| {
            let r2 = (xs[c] - center.0).powi(2) + (ys[r] - center.1).powi(2);
            *v = Complex64::new((-r2 / (waist * waist)).exp(), 0.0);
        });
        Ok(g)
    }

    pub fn rows(&self) -> usize {
        self.samples.nrows()
    }

    pub fn cols(&self) -> usize {
        self.samples.ncols()
    }

    pub fn xs(&self) -> Vec<f64> {
        axis(self.cols(), self.dx)
    }

    pub fn ys(&self) -> Vec<f64> {
        axis(self.rows(), self.dy)
    }

    /// `Σ|u|²·dx·dy`.
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx * self.dy
    }

    pub fn intensity(&self) -> Array2<f64> {
        self.samples.mapv(|v| v.norm_sqr())
    }

    /// `Σ conj(self)·other·dx·dy`.
    pub fn inner(&self, other: &FieldGrid) -> Result<Complex64> {
        if self.samples.dim() != other.samples.dim() {
            return Err(dim("inner product of differently shaped grids"));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        Zip::from(&self.samples).and(&other.samples).for_each(|a, b| acc += a.conj() * b);
        Ok(acc * self.dx * self.dy)
    }

    /// Second-moment beam radii `(w_x, w_y) = 2·(σ_x, σ_y)` of the intensity.
    pub fn second_moment_radius(&self) -> (f64, f64) {
        let (xs, ys) = (self.xs(), self.ys());
        let i = self.intensity();
        let total: f64 = i.sum();
        let (mut mx, mut my) = (0.0, 0.0);
        for ((r, c), v) in i.indexed_iter() {
            mx += v * xs[c];
            my += v * ys[r];
        }
        mx /= total;
        my /= total;
        let (mut vx, mut vy) = (0.0, 0.0);
        for ((r, c), v) in i.indexed_iter() {
            vx += v * (xs[c] - mx).powi(2);
            vy += v * (ys[r] - my).powi(2);
        }
        (2.0 * (vx / total).sqrt(), 2.0 * (vy / total).sqrt())
    }

    /// Nearest sample to `(x, y)`.
    pub fn nearest_index(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let c = (x / self.dx + (self.cols() as f64 - 1.0) / 2.0).round();
        let r = (y / self.dy + (self.rows() as f64 - 1.0) / 2.0).round();
        if c < 0.0 || r < 0.0 || c >= self.cols() as f64 || r >= self.rows() as f64 {
            return None;
        }
        Some((r as usize, c as usize))
    }

    /// Row-major little-endian (re, im) pairs plus a JSON sidecar.
    pub fn dump(&self, wavelength: f64) -> (Vec<u8>, FieldSidecar) {
        let mut bytes = Vec::with_capacity(self.samples.len() * 16);
        for v in self.samples.iter() {
            bytes.extend_from_slice(&v.re.to_le_bytes());
            bytes.extend_from_slice(&v.im.to_le_bytes());
        }
        let sidecar = FieldSidecar {
            schema_version: 1,
            shape: [self.rows(), self.cols()],
            dx: self.dx,
            dy: self.dy,
            wavelength,
            layout: "row-major little-endian f64 (re, im)".into(),
        };
        (bytes, sidecar)
    }

    pub fn from_dump(bytes: &[u8], sidecar: &FieldSidecar) -> Result<Self> {
        let [ny, nx] = sidecar.shape;
        if bytes.len() != ny * nx * 16 {
            return Err(dim(format!("dump has {} bytes, shape needs {}", bytes.len(), ny * nx * 16)));
        }
        let vals: Vec<Complex64> = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        let samples = Array2::from_shape_vec((ny, nx), vals).map_err(|e| dim(e.to_string()))?;
        Self::new(samples, sidecar.dx, sidecar.dy)
    }
}

/// Pixel-center coordinates of an `n`-sample axis centered on zero.
pub fn axis(n: usize, d: f64) -> Vec<f64> {
    let c = (n as f64 - 1.0) / 2.0;
    (0..n).map(|k| (k as f64 - c) * d).collect()
}
