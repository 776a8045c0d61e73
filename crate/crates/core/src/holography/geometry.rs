use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{dim, invalid, Error, Result};

/// Distances, SLM format and beam layout of the three-SLM chain (SI units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalGeometry {
    pub l01: f64,
    pub l12: f64,
    pub l2p: f64,
    pub wavelength: f64,
    /// `[columns, rows]`.
    pub slm_pixels: [usize; 2],
    pub pixel_pitch: f64,
    /// Region centers `r_n` on SLM1, `[x, y]` relative to the optical axis.
    pub beam_positions_slm1: Vec<[f64; 2]>,
    /// Region centers `R_m` on SLM2.
    pub beam_positions_slm2: Vec<[f64; 2]>,
    pub region_radius: f64,
    /// Lens in each SLM1 region; `None` means no lens term.
    #[serde(default)]
    pub lens_f1: Option<f64>,
    /// Lens in each SLM2 region.
    #[serde(default)]
    pub lens_f2: Option<f64>,
    /// `θ_mn`, rows indexed by target `m`; absent means zeros.
    #[serde(default)]
    pub phase_compensation: Option<Vec<Vec<f64>>>,
}

impl OpticalGeometry {
    pub fn n(&self) -> usize {
        self.beam_positions_slm1.len()
    }

    pub fn aperture(&self) -> (f64, f64) {
        (
            self.slm_pixels[0] as f64 * self.pixel_pitch,
            self.slm_pixels[1] as f64 * self.pixel_pitch,
        )
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn theta(&self, m: usize, n: usize) -> f64 {
        self.phase_compensation.as_ref().map_or(0.0, |t| t[m][n])
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("l01", self.l01),
            ("l12", self.l12),
            ("l2p", self.l2p),
            ("wavelength", self.wavelength),
            ("pixel_pitch", self.pixel_pitch),
            ("region_radius", self.region_radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive")));
            }
        }
        if self.slm_pixels[0] < 2 || self.slm_pixels[1] < 2 {
            return Err(invalid("SLM must have at least 2x2 pixels"));
        }
        for f in [self.lens_f1, self.lens_f2].into_iter().flatten() {
            if !(f.is_finite() && f != 0.0) {
                return Err(invalid("lens focal lengths must be finite and nonzero"));
            }
        }
        let n = self.n();
        if n == 0 || self.beam_positions_slm2.len() != n {
            return Err(dim(format!(
                "{} SLM1 positions vs {} SLM2 positions",
                n,
                self.beam_positions_slm2.len()
            )));
        }
        if let Some(t) = &self.phase_compensation {
            if t.len() != n || t.iter().any(|r| r.len() != n) {
                return Err(dim("phase_compensation must be n x n"));
            }
        }
        let (w, h) = self.aperture();
        let r = self.region_radius;
        for plane in [&self.beam_positions_slm1, &self.beam_positions_slm2] {
            for p in plane.iter() {
                if p[0].abs() + r > w / 2.0 + 1e-12 || p[1].abs() + r > h / 2.0 + 1e-12 {
                    return Err(invalid(format!("region at ({:.3e}, {:.3e}) leaves the SLM aperture", p[0], p[1])));
                }
            }
            if let Some((a, b)) = first_overlap(plane, r) {
                return Err(invalid(format!("regions {a} and {b} overlap")));
            }
        }
        Ok(())
    }
}

fn first_overlap(points: &[[f64; 2]], r: f64) -> Option<(usize, usize)> {
    for a in 0..points.len() {
        for b in (a + 1)..points.len() {
            let d = (points[a][0] - points[b][0]).hypot(points[a][1] - points[b][1]);
            if d < 2.0 * r * (1.0 - 1e-9) {
                return Some((a, b));
            }
        }
    }
    None
}

/// Waist minimizing the beam radius on both SLMs and the radius at the SLMs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamGeometry {
    pub w0: f64,
    pub w_slm: f64,
}

/// `w0 = √(λz/π)`, `w_slm = √2·w0`, with `z` half the SLM1–SLM2 distance.
pub fn beam_geometry(wavelength: f64, z_half: f64) -> Result<BeamGeometry> {
    if !(wavelength > 0.0 && z_half > 0.0) {
        return Err(invalid("wavelength and distance must be positive"));
    }
    let w0 = (wavelength * z_half / PI).sqrt();
    Ok(BeamGeometry { w0, w_slm: w0 * 2f64.sqrt() })
}

/// Gaussian beam radius `w0·√(1 + (λz/(πw0²))²)`.
pub fn gaussian_radius(w0: f64, wavelength: f64, z: f64) -> f64 {
    w0 * (1.0 + (wavelength * z / (PI * w0 * w0)).powi(2)).sqrt()
}

/// Inputs for packing beam regions on an SLM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutPlan {
    /// `[columns, rows]`.
    pub slm_pixels: [usize; 2],
    pub pixel_pitch: f64,
    pub region_radius: f64,
    pub wavelength: f64,
    pub l12: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub positions: Vec<[f64; 2]>,
    pub capacity: usize,
    pub w_slm: f64,
}

/// Triangular-lattice packing; the `n` sites nearest the axis are returned.
pub fn layout_spins(n: usize, plan: &LayoutPlan) -> Result<Layout> {
    let beam = beam_geometry(plan.wavelength, plan.l12 / 2.0)?;
    let r = plan.region_radius;
    if !(r > 0.0 && plan.pixel_pitch > 0.0) {
        return Err(invalid("region radius and pixel pitch must be positive"));
    }
    if r < 1.5 * beam.w_slm {
        return Err(invalid(format!(
            "region radius {r:.3e} m is below 1.5 x the beam radius {:.3e} m",
            beam.w_slm
        )));
    }
    let w = plan.slm_pixels[0] as f64 * plan.pixel_pitch;
    let h = plan.slm_pixels[1] as f64 * plan.pixel_pitch;
    let wide = lattice(w, h, r);
    let tall: Vec<[f64; 2]> = lattice(h, w, r).into_iter().map(|[a, b]| [b, a]).collect();
    let mut sites = if tall.len() > wide.len() { tall } else { wide };
    let capacity = sites.len();
    if n > capacity {
        return Err(Error::Capacity { what: "beam regions", requested: n, maximum: capacity });
    }
    sites.sort_by(|a, b| {
        let da = a[0].hypot(a[1]);
        let db = b[0].hypot(b[1]);
        da.total_cmp(&db).then(a[1].total_cmp(&b[1])).then(a[0].total_cmp(&b[0]))
    });
    sites.truncate(n);
    Ok(Layout { positions: sites, capacity, w_slm: beam.w_slm })
}

/// Like [`layout_spins`], but picks sites such that no `p_a + p_b − p_c`
/// (with `c ∉ {a, b}`) coincides with a chosen site `p_m`.
///
/// Phase-only splitting into several gratings generates third-order
/// products along those sums; on a lattice they land on other regions and
/// couple the matrix entries. Sites nearer the axis are preferred; the
/// search is exhaustive, so keep `n` small.
pub fn layout_intermod_free(n: usize, plan: &LayoutPlan) -> Result<Layout> {
    let full = layout_spins(0, plan)?;
    let all = layout_spins(full.capacity, plan)?;
    let mut chosen = Vec::with_capacity(n);
    if !pick(&all.positions, 0, n, &mut chosen) {
        return Err(invalid(format!(
            "no intermodulation-free set of {n} sites among {} lattice sites",
            all.capacity
        )));
    }
    Ok(Layout { positions: chosen, capacity: all.capacity, w_slm: all.w_slm })
}

fn pick(sites: &[[f64; 2]], from: usize, n: usize, chosen: &mut Vec<[f64; 2]>) -> bool {
    if chosen.len() == n {
        return true;
    }
    for k in from..sites.len() {
        if sites.len() - k < n - chosen.len() {
            return false;
        }
        chosen.push(sites[k]);
        if intermod_free(chosen) && pick(sites, k + 1, n, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn intermod_free(p: &[[f64; 2]]) -> bool {
    let tol = 1e-9 * p.iter().map(|q| q[0].hypot(q[1])).fold(1e-12, f64::max);
    let len = p.len();
    for a in 0..len {
        for b in a..len {
            for c in (0..len).filter(|&c| c != a && c != b) {
                let x = [p[a][0] + p[b][0] - p[c][0], p[a][1] + p[b][1] - p[c][1]];
                if p.iter().any(|m| (m[0] - x[0]).hypot(m[1] - x[1]) < tol) {
                    return false;
                }
            }
        }
    }
    true
}

/// Centers of radius-`r` circles packed in rows along the `w` side, centered on the origin.
fn lattice(w: f64, h: f64, r: f64) -> Vec<[f64; 2]> {
    if w < 2.0 * r || h < 2.0 * r {
        return Vec::new();
    }
    let pitch_y = 3f64.sqrt() * r;
    let rows = ((h - 2.0 * r) / pitch_y + 1e-9).floor() as usize + 1;
    let mut pts = Vec::new();
    for k in 0..rows {
        let shift = if k % 2 == 1 { r } else { 0.0 };
        let room = w - 2.0 * r - shift;
        if room < -1e-12 {
            continue;
        }
        let count = (room / (2.0 * r) + 1e-9).floor() as usize + 1;
        for c in 0..count {
            pts.push([r + shift + 2.0 * r * c as f64, r + pitch_y * k as f64]);
        }
    }
    let (min_x, max_x) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[0]), b.max(p[0])));
    let (min_y, max_y) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[1]), b.max(p[1])));
    let (cx, cy) = ((min_x + max_x) / 2.0, (min_y + max_y) / 2.0);
    pts.into_iter().map(|[x, y]| [x - cx, y - cy]).collect()
}

/// Focal length placing the waist of a beam with complex parameter `q` (at the lens)
/// a distance `waist_at` downstream. `tight` picks the stronger of the two solutions.
pub fn waist_placing_focal_length(q: num_complex::Complex64, waist_at: f64, tight: bool) -> Option<f64> {
    let inv = 1.0 / q;
    let (a, b) = (inv.re, -inv.im);
    // after the lens 1/q' = u − ib with u = a − 1/f; the waist sits where Re(q' + L) = 0,
    // i.e. L·u² + u + L·b² = 0
    let l = waist_at;
    let disc = 1.0 - 4.0 * l * l * b * b;
    if disc < 0.0 {
        return None;
    }
    let roots = [(-1.0 + disc.sqrt()) / (2.0 * l), (-1.0 - disc.sqrt()) / (2.0 * l)];
    let u = if tight { roots[1] } else { roots[0] };
    let inv_f = a - u;
    (inv_f.abs() > 1e-15).then(|| 1.0 / inv_f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn ratio_is_sqrt_two() {
        for (l, z) in [(1.55e-6, 0.377), (8e-7, 1e-6), (5e-7, 3.0)] {
            let b = beam_geometry(l, z).unwrap();
            assert!((b.w_slm / b.w0 - 2f64.sqrt()).abs() < 1e-14);
        }
        assert!(beam_geometry(0.0, 1.0).is_err());
    }

    #[test]
    fn layout_is_non_overlapping_and_inside() {
        let plan = LayoutPlan {
            slm_pixels: [1920, 1080],
            pixel_pitch: 8e-6,
            region_radius: 950e-6,
            wavelength: 1.55e-6,
            l12: 0.754,
        };
        let lay = layout_spins(30, &plan).unwrap();
        assert_eq!(lay.positions.len(), 30);
        assert!(first_overlap(&lay.positions, plan.region_radius).is_none());
        for p in &lay.positions {
            assert!(p[0].abs() + 950e-6 <= 1920.0 * 8e-6 / 2.0 + 1e-12);
            assert!(p[1].abs() + 950e-6 <= 1080.0 * 8e-6 / 2.0 + 1e-12);
        }
        match layout_spins(1000, &plan) {
            Err(Error::Capacity { maximum, .. }) => assert_eq!(maximum, lay.capacity),
            other => panic!("expected capacity error, got {other:?}"),
        }
        assert!(layout_spins(4, &LayoutPlan { region_radius: 500e-6, ..plan }).is_err());
    }

    #[test]
    fn intermod_free_layout() {
        let plan = LayoutPlan {
            slm_pixels: [256, 256],
            pixel_pitch: 1e-5,
            region_radius: 4.5e-4,
            wavelength: 1.55e-6,
            l12: 0.06,
        };
        let lay = layout_intermod_free(4, &plan).unwrap();
        assert_eq!(lay.positions.len(), 4);
        assert!(intermod_free(&lay.positions));
        // the four sites nearest the axis form a parallelogram
        assert!(!intermod_free(&layout_spins(4, &plan).unwrap().positions));
        assert!(layout_intermod_free(6, &plan).is_err());
    }

    #[test]
    fn lens_places_waist() {
        let lam = 1.55e-6;
        let w = 2e-4;
        let zr = PI * w * w / lam;
        let q = Complex64::new(0.06, zr);
        for tight in [false, true] {
            let f = waist_placing_focal_length(q, 0.03, tight).unwrap();
            let q2 = 1.0 / (1.0 / q - 1.0 / f);
            assert!((q2.re + 0.03).abs() < 1e-9, "waist not at 0.03 m (tight={tight})");
        }
        assert!(waist_placing_focal_length(Complex64::new(0.0, 1e-3), 10.0, false).is_none());
    }
}
