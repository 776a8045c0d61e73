use std::f64::consts::PI;
use std::path::Path;

use image::{GrayImage, Luma};
use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;

use super::geometry::OpticalGeometry;
use super::grid::axis;
use crate::error::{dim, invalid, Result};

/// Which SLM a pattern is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulationRole {
    /// SLM0: splits the incident beam towards the SLM1 regions.
    Split0,
    /// SLM1: each region fans out to every SLM2 region.
    Split1,
    /// SLM2: each region recombines its incoming beams onto the axis direction.
    Recombine2,
}

/// Weights per role: `Split0` uses `input`, the others `matrix` with rows
/// indexed by the SLM2 region and columns by the SLM1 region.
#[derive(Debug, Clone, Copy)]
pub enum Weights<'a> {
    Input(&'a [Complex64]),
    Matrix(&'a DMatrix<Complex64>),
}

/// Pixel grid on which a pattern is rendered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlmGrid {
    pub rows: usize,
    pub cols: usize,
    pub pitch: f64,
}

impl SlmGrid {
    pub fn of(geometry: &OpticalGeometry) -> Self {
        Self { rows: geometry.slm_pixels[1], cols: geometry.slm_pixels[0], pitch: geometry.pixel_pitch }
    }
}

/// Rendering switches.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModulationOptions {
    /// Adds a 4-pixel-period blazed grating along x over the whole pattern.
    pub global_blaze: bool,
}

/// Ideal (complex, not phase-only) SLM modulation.
///
/// `region_factors` multiplies each SLM1 region (spin phases `σ_n`, or
/// arbitrary complex factors); it is ignored for the other roles. Pixels
/// outside every region of SLM1/SLM2 get a 0/π checkerboard, even parity 0.
pub fn ideal_modulation(
    role: ModulationRole,
    geometry: &OpticalGeometry,
    grid: SlmGrid,
    weights: Weights<'_>,
    region_factors: Option<&[Complex64]>,
    options: ModulationOptions,
) -> Result<Array2<Complex64>> {
    geometry.validate()?;
    let n = geometry.n();
    let k = geometry.wavenumber();
    let xs = axis(grid.cols, grid.pitch);
    let ys = axis(grid.rows, grid.pitch);
    let r1 = &geometry.beam_positions_slm1;
    let r2 = &geometry.beam_positions_slm2;
    let mut out = Array2::<Complex64>::zeros((grid.rows, grid.cols));

    match role {
        ModulationRole::Split0 => {
            let Weights::Input(alpha) = weights else {
                return Err(invalid("split0 takes an input amplitude vector"));
            };
            if alpha.len() != n {
                return Err(dim(format!("{} input amplitudes for {n} beams", alpha.len())));
            }
            let dirs: Vec<[f64; 2]> = r1.iter().map(|p| [p[0] / geometry.l01, p[1] / geometry.l01]).collect();
            out.indexed_iter_mut().for_each(|((r, c), v)| {
                let (x, y) = (xs[c], ys[r]);
                *v = alpha
                    .iter()
                    .zip(&dirs)
                    .map(|(a, d)| a * Complex64::from_polar(1.0, -k * (d[0] * x + d[1] * y)))
                    .sum();
            });
        }
        ModulationRole::Split1 | ModulationRole::Recombine2 => {
            let Weights::Matrix(w) = weights else {
                return Err(invalid("split1/recombine2 take an n x n weight matrix"));
            };
            if w.shape() != (n, n) {
                return Err(dim(format!("weight matrix is {:?}, expected ({n}, {n})", w.shape())));
            }
            if let Some(f) = region_factors {
                if f.len() != n {
                    return Err(dim(format!("{} region factors for {n} regions", f.len())));
                }
            }
            let split = role == ModulationRole::Split1;
            let centers = if split { r1 } else { r2 };
            let lens = if split { geometry.lens_f1 } else { geometry.lens_f2 };
            let r2sq = geometry.region_radius.powi(2);
            // grating vectors per region and partner
            let tilts: Vec<Vec<[f64; 2]>> = (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| {
                            if split {
                                // region a on SLM1 sends to R_b
                                let (rn, rm) = (r1[a], r2[b]);
                                [
                                    (rm[0] - rn[0]) / geometry.l12 - rn[0] / geometry.l01,
                                    (rm[1] - rn[1]) / geometry.l12 - rn[1] / geometry.l01,
                                ]
                            } else {
                                // region a on SLM2 receives from r_b and exits along the axis
                                let (rm, rn) = (r2[a], r1[b]);
                                [(rm[0] - rn[0]) / geometry.l12, (rm[1] - rn[1]) / geometry.l12]
                                    .map(|t| -t)
                            }
                        })
                        .collect()
                })
                .collect();
            out.indexed_iter_mut().for_each(|((r, c), v)| {
                let (x, y) = (xs[c], ys[r]);
                let region = centers
                    .iter()
                    .position(|p| (x - p[0]).powi(2) + (y - p[1]).powi(2) <= r2sq);
                *v = match region {
                    None => {
                        if (r + c) % 2 == 0 {
                            Complex64::new(1.0, 0.0)
                        } else {
                            Complex64::new(-1.0, 0.0)
                        }
                    }
                    Some(a) => {
                        let p = centers[a];
                        let (dx, dy) = (x - p[0], y - p[1]);
                        let mut acc = Complex64::new(0.0, 0.0);
                        for b in 0..n {
                            // split1: β_ba weights region a → target b; recombine2: γ_ab
                            let (weight, theta) = if split {
                                (w[(b, a)], geometry.theta(b, a))
                            } else {
                                (w[(a, b)], 0.0)
                            };
                            let t = tilts[a][b];
                            acc += weight * Complex64::from_polar(1.0, -k * (t[0] * dx + t[1] * dy) + theta);
                        }
                        if let Some(f) = lens {
                            acc *= Complex64::from_polar(1.0, k * (dx * dx + dy * dy) / (2.0 * f));
                        }
                        if split {
                            if let Some(fac) = region_factors {
                                acc *= fac[a];
                            }
                        }
                        acc
                    }
                };
            });
        }
    }
    if options.global_blaze {
        out.indexed_iter_mut().for_each(|((_, c), v)| {
            *v *= Complex64::from_polar(1.0, 2.0 * PI * (c % 4) as f64 / 4.0);
        });
    }
    Ok(out)
}

/// Phase-only SLM pattern, phases in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hologram {
    pub phase: Array2<f64>,
    pub pitch: f64,
}

impl Hologram {
    pub fn new(phase: Array2<f64>, pitch: f64) -> Result<Self> {
        if !(pitch > 0.0) {
            return Err(invalid("pixel pitch must be positive"));
        }
        if phase.iter().any(|p| !p.is_finite()) {
            return Err(invalid("non-finite phase"));
        }
        Ok(Self { phase: phase.mapv(wrap_phase), pitch })
    }

    /// `exp(i·phase)`.
    pub fn transmission(&self) -> Array2<Complex64> {
        self.phase.mapv(|p| Complex64::from_polar(1.0, p))
    }

    /// Gray levels `round(256·φ/2π) mod 256`.
    pub fn gray_levels(&self) -> Array2<u8> {
        self.phase.mapv(|p| ((p / (2.0 * PI) * 256.0).round() as i64).rem_euclid(256) as u8)
    }

    pub fn from_gray_levels(levels: &Array2<u8>, pitch: f64) -> Result<Self> {
        Self::new(levels.mapv(|g| f64::from(g) * 2.0 * PI / 256.0), pitch)
    }

    /// 8-bit grayscale export; the format follows the extension (`.png` or `.pgm`).
    pub fn save_image(&self, path: &Path) -> Result<()> {
        let g = self.gray_levels();
        let (rows, cols) = g.dim();
        let img = GrayImage::from_fn(cols as u32, rows as u32, |x, y| Luma([g[[y as usize, x as usize]]]));
        img.save(path).map_err(|e| crate::Error::Io(std::io::Error::other(e)))
    }

    pub fn load_image(path: &Path, pitch: f64) -> Result<Self> {
        let img = image::open(path).map_err(|e| crate::Error::Io(std::io::Error::other(e)))?.to_luma8();
        let (w, h) = img.dimensions();
        let levels = Array2::from_shape_fn((h as usize, w as usize), |(r, c)| img.get_pixel(c as u32, r as u32)[0]);
        Self::from_gray_levels(&levels, pitch)
    }
}

fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// Closest phase-only pattern: `arg(h)`, and 0 where `h = 0`.
pub fn phase_only_project(h_ideal: &Array2<Complex64>, pitch: f64) -> Result<Hologram> {
    Hologram::new(h_ideal.mapv(|v| if v.norm_sqr() == 0.0 { 0.0 } else { v.arg() }), pitch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy_geometry(n: usize) -> OpticalGeometry {
        let pos: Vec<[f64; 2]> = (0..n).map(|k| [(k as f64 - (n as f64 - 1.0) / 2.0) * 6e-4, 0.0]).collect();
        OpticalGeometry {
            l01: 0.06,
            l12: 0.06,
            l2p: 0.04,
            wavelength: 1.55e-6,
            slm_pixels: [64 * n, 64],
            pixel_pitch: 1e-5,
            beam_positions_slm1: pos.clone(),
            beam_positions_slm2: pos,
            region_radius: 2.5e-4,
            lens_f1: None,
            lens_f2: Some(0.05),
            phase_compensation: None,
        }
    }

    #[test]
    fn projection_basics() {
        let h = Array2::from_shape_vec((1, 3), vec![Complex64::new(-3.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 2.0)]).unwrap();
        let p = phase_only_project(&h, 1e-5).unwrap();
        assert!((p.phase[[0, 0]] - PI).abs() < 1e-15);
        assert_eq!(p.phase[[0, 1]], 0.0);
        assert!((p.phase[[0, 2]] - PI / 2.0).abs() < 1e-15);
        let again = phase_only_project(&p.transmission(), 1e-5).unwrap();
        assert!(again.phase.iter().zip(p.phase.iter()).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn projection_beats_quantized_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..8 {
            let h = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            let u = h / h.norm();
            let p = phase_only_project(&Array2::from_elem((1, 1), h), 1.0).unwrap().phase[[0, 0]];
            let best = (0..3600)
                .map(|q| (Complex64::from_polar(1.0, q as f64 * 2.0 * PI / 3600.0) - u).norm())
                .fold(f64::INFINITY, f64::min);
            assert!((Complex64::from_polar(1.0, p) - u).norm() <= best + 1e-12);
        }
    }

    #[test]
    fn single_beam_is_grating_plus_lens() {
        let mut g = toy_geometry(1);
        g.lens_f1 = Some(0.1);
        g.beam_positions_slm2 = vec![[5e-5, 0.0]];
        g.beam_positions_slm1 = vec![[0.0, 0.0]];
        let grid = SlmGrid::of(&g);
        let w = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let m = ideal_modulation(ModulationRole::Split1, &g, grid, Weights::Matrix(&w), None, ModulationOptions::default()).unwrap();
        let xs = axis(grid.cols, grid.pitch);
        let ys = axis(grid.rows, grid.pitch);
        let k = g.wavenumber();
        for (r, c) in [(32, 32), (30, 40), (20, 25)] {
            let (x, y) = (xs[c], ys[r]);
            let expected = Complex64::from_polar(1.0, -k * 5e-5 / 0.06 * x + k * (x * x + y * y) / 0.2);
            assert!((m[[r, c]] - expected).norm() < 1e-9);
        }
        // outside the region: checkerboard
        assert_eq!(m[[0, 0]], Complex64::new(1.0, 0.0));
        assert_eq!(m[[0, 1]], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn spin_flip_negates_region() {
        let g = toy_geometry(3);
        let grid = SlmGrid::of(&g);
        let w = DMatrix::from_fn(3, 3, |a, b| Complex64::new(1.0 + a as f64, b as f64 * 0.5));
        let up = [Complex64::new(1.0, 0.0); 3];
        let mut flip = up;
        flip[1] = Complex64::new(-1.0, 0.0);
        let opts = ModulationOptions::default();
        let a = ideal_modulation(ModulationRole::Split1, &g, grid, Weights::Matrix(&w), Some(&up), opts).unwrap();
        let b = ideal_modulation(ModulationRole::Split1, &g, grid, Weights::Matrix(&w), Some(&flip), opts).unwrap();
        let xs = axis(grid.cols, grid.pitch);
        for ((r, c), v) in a.indexed_iter() {
            let in_region1 = (xs[c] - g.beam_positions_slm1[1][0]).hypot(axis(grid.rows, grid.pitch)[r]) <= g.region_radius;
            if in_region1 {
                assert_eq!(b[[r, c]], -v);
            } else {
                assert_eq!(b[[r, c]], *v);
            }
        }
    }

    #[test]
    fn gray_export_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let h = Hologram::new(Array2::from_shape_fn((5, 7), |(r, c)| (r * 7 + c) as f64 * 0.17), 8e-6).unwrap();
        for ext in ["png", "pgm"] {
            let path = dir.path().join(format!("h.{ext}"));
            h.save_image(&path).unwrap();
            let back = Hologram::load_image(&path, 8e-6).unwrap();
            assert_eq!(back.gray_levels(), h.gray_levels());
        }
        let full = Hologram::new(Array2::from_elem((1, 1), 2.0 * PI - 1e-9), 1.0).unwrap();
        assert_eq!(full.gray_levels()[[0, 0]], 0);
    }

    #[test]
    fn mismatched_weights_rejected() {
        let g = toy_geometry(2);
        let grid = SlmGrid::of(&g);
        let w = DMatrix::from_element(3, 3, Complex64::new(1.0, 0.0));
        let opts = ModulationOptions::default();
        assert!(ideal_modulation(ModulationRole::Recombine2, &g, grid, Weights::Matrix(&w), None, opts).is_err());
        assert!(ideal_modulation(ModulationRole::Split0, &g, grid, Weights::Matrix(&w), None, opts).is_err());
    }
}
