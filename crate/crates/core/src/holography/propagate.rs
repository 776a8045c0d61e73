use std::f64::consts::PI;

use ndarray::{s, Array2};
use num_complex::Complex64;

use super::fft::Fft2;
use super::grid::FieldGrid;
use crate::error::{dim, invalid, Error, Result};

/// Rayleigh–Sommerfeld propagation over a fixed distance by padded FFT convolution.
///
/// The kernel `h = z·e^{−ikr}(1/r + ik)/(2πr²)` is sampled at every grid offset,
/// zero-padded to `3L`, transformed once and cached together with the `dx·dy`
/// quadrature weight and, optionally, the rectangular-pixel factor
/// `sinc(π f_x dx)·sinc(π f_y dy)`.
#[derive(Debug)]
pub struct Propagator {
    rows: usize,
    cols: usize,
    dx: f64,
    dy: f64,
    z: f64,
    wavelength: f64,
    spectrum: Array2<Complex64>,
    fft: Fft2,
}

impl Propagator {
    pub fn new(rows: usize, cols: usize, dx: f64, dy: f64, z: f64, wavelength: f64, pixel_aperture: bool) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(dim("propagation grid must be at least 2x2"));
        }
        if !(z > 0.0 && wavelength > 0.0 && dx > 0.0 && dy > 0.0) {
            return Err(invalid("z, wavelength and sampling intervals must be positive"));
        }
        check_aliasing((cols - 1) as f64 * dx, dx, z, wavelength, "x")?;
        check_aliasing((rows - 1) as f64 * dy, dy, z, wavelength, "y")?;

        let (pr, pc) = (3 * rows, 3 * cols);
        let k = 2.0 * PI / wavelength;
        let mut kernel = Array2::<Complex64>::zeros((pr, pc));
        for a in 0..(2 * rows - 1) {
            let y = (a as f64 - (rows - 1) as f64) * dy;
            for b in 0..(2 * cols - 1) {
                let x = (b as f64 - (cols - 1) as f64) * dx;
                let r = (x * x + y * y + z * z).sqrt();
                let phase = Complex64::from_polar(1.0, -k * r);
                kernel[[a, b]] = phase * Complex64::new(1.0 / r, k) * (z / (2.0 * PI * r * r));
            }
        }
        let fft = Fft2::new(pr, pc);
        fft.forward(&mut kernel);
        let w = dx * dy;
        if pixel_aperture {
            let fy = frequencies(pr, dy);
            let fx = frequencies(pc, dx);
            kernel.indexed_iter_mut().for_each(|((a, b), v)| {
                *v *= w * sinc(PI * fx[b] * dx) * sinc(PI * fy[a] * dy);
            });
        } else {
            kernel.mapv_inplace(|v| v * w);
        }
        Ok(Self { rows, cols, dx, dy, z, wavelength, spectrum: kernel, fft })
    }

    /// Propagator matched to `grid`'s shape and sampling.
    pub fn for_grid(grid: &FieldGrid, z: f64, wavelength: f64, pixel_aperture: bool) -> Result<Self> {
        Self::new(grid.rows(), grid.cols(), grid.dx, grid.dy, z, wavelength, pixel_aperture)
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// `T_z u`.
    pub fn forward(&self, u: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        self.check(u)?;
        let (r, c) = (self.rows, self.cols);
        let mut pad = Array2::zeros((3 * r, 3 * c));
        pad.slice_mut(s![..r, ..c]).assign(u);
        self.fft.forward(&mut pad);
        pad.zip_mut_with(&self.spectrum, |a, h| *a *= h);
        self.fft.inverse(&mut pad);
        Ok(pad.slice(s![r - 1..2 * r - 1, c - 1..2 * c - 1]).to_owned())
    }

    /// Adjoint `T′_z v`, satisfying `⟨T u, v⟩ = ⟨u, T′ v⟩`.
    pub fn adjoint(&self, v: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        self.check(v)?;
        let (r, c) = (self.rows, self.cols);
        let mut pad = Array2::zeros((3 * r, 3 * c));
        pad.slice_mut(s![r - 1..2 * r - 1, c - 1..2 * c - 1]).assign(v);
        self.fft.forward(&mut pad);
        pad.zip_mut_with(&self.spectrum, |a, h| *a *= h.conj());
        self.fft.inverse(&mut pad);
        Ok(pad.slice(s![..r, ..c]).to_owned())
    }

    pub fn forward_grid(&self, u: &FieldGrid) -> Result<FieldGrid> {
        if (u.dx - self.dx).abs() > 1e-12 * self.dx || (u.dy - self.dy).abs() > 1e-12 * self.dy {
            return Err(dim("grid sampling differs from the propagator's"));
        }
        FieldGrid::new(self.forward(&u.samples)?, u.dx, u.dy)
    }

    fn check(&self, u: &Array2<Complex64>) -> Result<()> {
        if u.dim() != (self.rows, self.cols) {
            return Err(dim(format!("field is {:?}, propagator expects {:?}", u.dim(), (self.rows, self.cols))));
        }
        Ok(())
    }
}

/// Free-space propagation of `u` over `z` without the pixel-aperture factor.
pub fn propagate(u: &FieldGrid, z: f64, wavelength: f64) -> Result<FieldGrid> {
    Propagator::for_grid(u, z, wavelength, false)?.forward_grid(u)
}

fn check_aliasing(extent: f64, d: f64, z: f64, wavelength: f64, axis: &str) -> Result<()> {
    let sin_max = extent / (extent * extent + z * z).sqrt();
    let nyquist = wavelength / (2.0 * d);
    if sin_max > nyquist {
        return Err(Error::Sampling(format!(
            "kernel aliases along {axis}: propagation angle sine {sin_max:.4} exceeds grid Nyquist {nyquist:.4}; \
             increase z or refine sampling"
        )));
    }
    Ok(())
}

fn frequencies(n: usize, d: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
            k / (n as f64 * d)
        })
        .collect()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(r: usize, c: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
        Array2::from_shape_fn((r, c), |_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn adjoint_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = Propagator::new(24, 40, 8e-6, 8e-6, 0.02, 1.55e-6, true).unwrap();
        let u = random_field(24, 40, &mut rng);
        let v = random_field(24, 40, &mut rng);
        let lhs: Complex64 = p.forward(&u).unwrap().iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
        let rhs: Complex64 = u.iter().zip(p.adjoint(&v).unwrap().iter()).map(|(a, b)| a.conj() * b).sum();
        assert!((lhs - rhs).norm() <= 1e-9 * lhs.norm());
    }

    #[test]
    fn linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Propagator::new(32, 32, 1e-5, 1e-5, 0.05, 1.55e-6, false).unwrap();
        let u1 = random_field(32, 32, &mut rng);
        let u2 = random_field(32, 32, &mut rng);
        let sum = p.forward(&(&u1 + &u2)).unwrap();
        let parts = p.forward(&u1).unwrap() + p.forward(&u2).unwrap();
        let scale = parts.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(sum.iter().zip(parts.iter()).all(|(a, b)| (a - b).norm() <= 1e-10 * scale));
    }

    #[test]
    fn aliasing_rejected() {
        match Propagator::new(256, 256, 8e-6, 8e-6, 1e-3, 1.55e-6, false) {
            Err(Error::Sampling(_)) => {}
            other => panic!("expected sampling error, got {other:?}"),
        }
    }

    #[test]
    fn gaussian_on_axis_phase() {
        // a broad Gaussian is locally a plane wave: phase −kz plus the Gouy term atan(z/z_R)
        let (n, d, lam, w, z) = (256usize, 8e-6, 1.55e-6, 3e-4, 0.03);
        let g = FieldGrid::gaussian(n, n, d, d, w, (0.0, 0.0)).unwrap();
        let out = propagate(&g, z, lam).unwrap();
        let k = 2.0 * PI / lam;
        let zr = PI * w * w / lam;
        // the axis falls between the four central pixels
        let centre = (out.samples[[n / 2, n / 2]] + out.samples[[n / 2 - 1, n / 2 - 1]]
            + out.samples[[n / 2, n / 2 - 1]] + out.samples[[n / 2 - 1, n / 2]]) / 4.0;
        let expected = -(k * z).rem_euclid(2.0 * PI) + (z / zr).atan();
        let diff = (centre.arg() - expected + PI).rem_euclid(2.0 * PI) - PI;
        assert!(diff.abs() < 1e-3, "phase error {diff}");
    }

    #[test]
    fn contained_beam_keeps_power() {
        let g = FieldGrid::gaussian(128, 128, 1e-5, 1e-5, 1.2e-4, (0.0, 0.0)).unwrap();
        let out = propagate(&g, 0.02, 1.55e-6).unwrap();
        assert!(out.power() / g.power() > 0.99);
    }
}
