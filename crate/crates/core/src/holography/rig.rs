use std::sync::Arc;

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{layout_intermod_free, waist_placing_focal_length, LayoutPlan, OpticalGeometry};
use super::grid::{axis, FieldGrid};
use super::modulation::{ideal_modulation, phase_only_project, ModulationOptions, ModulationRole, SlmGrid, Weights};
use super::propagate::Propagator;
use crate::calibration::{calibrate, CalibrationPlan, CalibrationReport, IntensityRig};
use crate::error::{dim, invalid, Result};
use crate::ising::{EigenSign, SpectralTransform, SpinState};
use crate::optics::{detect, hamiltonian_from_readings, DetectorModel, Evaluation, HamiltonianEvaluator};

/// How an output beam is read from the detection plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMode {
    /// Pixel nearest the beam center.
    Center,
    /// Mean intensity of the 3×3 block around it.
    Average9,
}

/// Everything needed to build the simulated three-SLM chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigConfig {
    pub geometry: OpticalGeometry,
    /// Waist of the collimated Gaussian incident on SLM0, located at SLM0.
    pub incident_waist: f64,
    pub detection: DetectionMode,
    /// Rectangular-pixel factor in the propagation kernels.
    #[serde(default = "yes")]
    pub pixel_aperture: bool,
}

fn yes() -> bool {
    true
}

impl RigConfig {
    /// Desk-scale chain for `n` beams on a 256×256 grid at 10 µm pitch, λ = 1.55 µm.
    ///
    /// Regions come from [`layout_intermod_free`]. The SLM1 lens puts the
    /// waist midway to SLM2; the SLM2 lens focuses on the detection plane.
    pub fn toy(n: usize) -> Result<Self> {
        let (wavelength, pitch, l01, l12, l2p) = (1.55e-6, 1e-5, 0.06, 0.06, 0.04);
        let region_radius = 4.5e-4;
        let incident_waist = 2e-4;
        let layout = layout_intermod_free(
            n,
            &LayoutPlan { slm_pixels: [256, 256], pixel_pitch: pitch, region_radius, wavelength, l12 },
        )?;
        let (f1, f2) = chain_lenses(wavelength, incident_waist, l01, l12, l2p)?;
        Ok(Self {
            geometry: OpticalGeometry {
                l01,
                l12,
                l2p,
                wavelength,
                slm_pixels: [256, 256],
                pixel_pitch: pitch,
                beam_positions_slm1: layout.positions.clone(),
                beam_positions_slm2: layout.positions,
                region_radius,
                lens_f1: Some(f1),
                lens_f2: Some(f2),
                phase_compensation: None,
            },
            incident_waist,
            detection: DetectionMode::Average9,
            pixel_aperture: true,
        })
    }
}

/// `(f1, f2)`: waist midway between SLM1 and SLM2, then a focus on the detection plane.
pub fn chain_lenses(wavelength: f64, incident_waist: f64, l01: f64, l12: f64, l2p: f64) -> Result<(f64, f64)> {
    let zr = std::f64::consts::PI * incident_waist * incident_waist / wavelength;
    let q1 = Complex64::new(l01, zr);
    let f1 = waist_placing_focal_length(q1, l12 / 2.0, false)
        .ok_or_else(|| invalid("no SLM1 lens places the waist midway"))?;
    let q2 = 1.0 / (1.0 / q1 - 1.0 / f1) + l12;
    let f2 = waist_placing_focal_length(q2, l2p, true)
        .ok_or_else(|| invalid("no SLM2 lens focuses on the detection plane"))?;
    Ok((f1, f2))
}

/// The full diffraction chain with programmable splitting and input gains.
///
/// Inputs to [`IntensityRig::measure`] are realized as SLM1 region phases:
/// nonzero entries must share one magnitude (it scales the laser power),
/// and zero entries switch their region to the scattering checkerboard.
#[derive(Debug)]
pub struct PhysicalRig {
    config: RigConfig,
    grid: SlmGrid,
    incident: Array2<Complex64>,
    p01: Propagator,
    p12: Propagator,
    p2p: Propagator,
    /// Region index per SLM1 pixel, `usize::MAX` outside.
    labels: Array2<usize>,
    checker: Array2<Complex64>,
    slm1: Array2<Complex64>,
    slm2: Array2<Complex64>,
    at_slm1: Array2<Complex64>,
    gains: Vec<f64>,
    programmed: DMatrix<Complex64>,
    pixels: Vec<Vec<(usize, usize)>>,
    pinhole: Array2<f64>,
    pinhole_radius: f64,
    renders: std::sync::atomic::AtomicUsize,
}

impl PhysicalRig {
    pub fn new(config: RigConfig) -> Result<Self> {
        let g = &config.geometry;
        g.validate()?;
        if !(config.incident_waist > 0.0) {
            return Err(invalid("incident waist must be positive"));
        }
        let n = g.n();
        let grid = SlmGrid::of(g);
        let (rows, cols, d) = (grid.rows, grid.cols, grid.pitch);
        let incident = FieldGrid::gaussian(rows, cols, d, d, config.incident_waist, (0.0, 0.0))?.samples;
        let mk = |z| Propagator::new(rows, cols, d, d, z, g.wavelength, config.pixel_aperture);
        let (p01, p12, p2p) = (mk(g.l01)?, mk(g.l12)?, mk(g.l2p)?);

        let xs = axis(cols, d);
        let ys = axis(rows, d);
        let r2 = g.region_radius * g.region_radius;
        let labels = Array2::from_shape_fn((rows, cols), |(r, c)| {
            g.beam_positions_slm1
                .iter()
                .position(|p| (xs[c] - p[0]).powi(2) + (ys[r] - p[1]).powi(2) <= r2)
                .unwrap_or(usize::MAX)
        });
        let checker = Array2::from_shape_fn((rows, cols), |(r, c)| {
            Complex64::new(if (r + c) % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        });
        let ones = DMatrix::from_element(n, n, Complex64::new(1.0, 0.0));
        let slm2 = phase_only_project(
            &ideal_modulation(ModulationRole::Recombine2, g, grid, Weights::Matrix(&ones), None, ModulationOptions::default())?,
            d,
        )?
        .transmission();

        let pinhole_radius = pinhole_radius(g);
        let mut pixels = Vec::with_capacity(n);
        for p in &g.beam_positions_slm2 {
            let c = nearest(&xs, p[0]);
            let r = nearest(&ys, p[1]);
            let mut block = vec![(r, c)];
            if config.detection == DetectionMode::Average9 {
                if r == 0 || c == 0 || r + 1 >= rows || c + 1 >= cols {
                    return Err(invalid("detection window leaves the grid"));
                }
                block = (r - 1..=r + 1).flat_map(|a| (c - 1..=c + 1).map(move |b| (a, b))).collect();
            }
            pixels.push(block);
        }
        let ph2 = pinhole_radius * pinhole_radius;
        let pinhole = Array2::from_shape_fn((rows, cols), |(r, c)| {
            let inside = g
                .beam_positions_slm2
                .iter()
                .any(|p| (xs[c] - p[0]).powi(2) + (ys[r] - p[1]).powi(2) <= ph2);
            if inside {
                1.0
            } else {
                0.0
            }
        });

        let mut rig = Self {
            config,
            grid,
            incident,
            p01,
            p12,
            p2p,
            labels,
            checker,
            slm1: Array2::zeros((rows, cols)),
            slm2,
            at_slm1: Array2::zeros((rows, cols)),
            gains: vec![1.0; n],
            programmed: ones,
            pixels,
            pinhole,
            pinhole_radius,
            renders: Default::default(),
        };
        rig.refresh_slm0()?;
        rig.refresh_slm1()?;
        Ok(rig)
    }

    pub fn config(&self) -> &RigConfig {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.config.geometry.n()
    }

    pub fn pinhole_radius(&self) -> f64 {
        self.pinhole_radius
    }

    pub fn programmed(&self) -> &DMatrix<Complex64> {
        &self.programmed
    }

    pub fn input_gains(&self) -> &[f64] {
        &self.gains
    }

    /// Number of full-chain simulations run so far.
    pub fn renders(&self) -> usize {
        self.renders.load(std::sync::atomic::Ordering::Relaxed)
    }

    fn refresh_slm0(&mut self) -> Result<()> {
        let alpha: Vec<Complex64> = self.gains.iter().map(|g| Complex64::new(*g, 0.0)).collect();
        let h = ideal_modulation(
            ModulationRole::Split0,
            &self.config.geometry,
            self.grid,
            Weights::Input(&alpha),
            None,
            ModulationOptions::default(),
        )?;
        let t = phase_only_project(&h, self.grid.pitch)?.transmission();
        self.at_slm1 = self.p01.forward(&(&self.incident * &t))?;
        Ok(())
    }

    fn refresh_slm1(&mut self) -> Result<()> {
        let h = ideal_modulation(
            ModulationRole::Split1,
            &self.config.geometry,
            self.grid,
            Weights::Matrix(&self.programmed),
            None,
            ModulationOptions::default(),
        )?;
        self.slm1 = phase_only_project(&h, self.grid.pitch)?.transmission();
        Ok(())
    }

    /// Field on the detection plane (before the pinhole mask) for region phases `x`.
    pub fn render(&self, x: &[Complex64]) -> Result<Array2<Complex64>> {
        let n = self.n();
        if x.len() != n {
            return Err(dim(format!("{} inputs for {n} regions", x.len())));
        }
        let unit: Vec<Option<Complex64>> = x
            .iter()
            .map(|v| if v.norm() == 0.0 { None } else { Some(v / v.norm()) })
            .collect();
        let mut u = self.at_slm1.clone();
        ndarray::Zip::from(&mut u)
            .and(&self.labels)
            .and(&self.slm1)
            .and(&self.checker)
            .for_each(|v, &lab, &p, &ch| {
                *v *= match unit.get(lab).copied().flatten() {
                    Some(f) => f * p,
                    None => ch,
                };
            });
        let mut u = self.p12.forward(&u)?;
        u *= &self.slm2;
        self.renders.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        self.p2p.forward(&u)
    }

    /// Detection-plane intensity behind the pinholes.
    pub fn image(&self, x: &[Complex64]) -> Result<FieldGrid> {
        let mut u = self.render(x)?;
        u.zip_mut_with(&self.pinhole, |v, m| *v *= *m);
        FieldGrid::new(u, self.grid.pitch, self.grid.pitch)
    }

    /// Output intensities for region phases `x` (magnitudes ignored).
    pub fn intensities(&self, x: &[Complex64]) -> Result<Vec<f64>> {
        let u = self.render(x)?;
        Ok(self.read(&u))
    }

    /// Complex field at each output's center pixel per active region, with the
    /// all-dark background `B` removed; also returns `B`. For verification.
    pub fn effective_matrix(&self) -> Result<(DMatrix<Complex64>, Vec<Complex64>)> {
        let n = self.n();
        let centers: Vec<(usize, usize)> = self.pixels.iter().map(|b| b[b.len() / 2]).collect();
        let zero = vec![Complex64::new(0.0, 0.0); n];
        let bg = self.render(&zero)?;
        let b: Vec<Complex64> = centers.iter().map(|&(r, c)| bg[[r, c]]).collect();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut x = zero.clone();
            x[j] = Complex64::new(1.0, 0.0);
            let u = self.render(&x)?;
            for (i, &(r, c)) in centers.iter().enumerate() {
                m[(i, j)] = u[[r, c]] - b[i];
            }
        }
        Ok((m, b))
    }

    fn read(&self, u: &Array2<Complex64>) -> Vec<f64> {
        self.pixels
            .iter()
            .map(|block| block.iter().map(|&(r, c)| u[[r, c]].norm_sqr() * self.pinhole[[r, c]]).sum::<f64>() / block.len() as f64)
            .collect()
    }
}

fn nearest(ax: &[f64], v: f64) -> usize {
    let mut best = 0;
    for (i, a) in ax.iter().enumerate() {
        if (a - v).abs() < (ax[best] - v).abs() {
            best = i;
        }
    }
    best
}

/// Half the smallest separation between a wanted spot and a stray order.
///
/// Beam `n` leaving SLM2 region `m` through the grating meant for beam `n′`
/// lands `(r_n′ − r_n)·L2p/L12` away from `R_m`; neighboring outputs sit
/// `|R_m − R_m′|` apart.
fn pinhole_radius(g: &OpticalGeometry) -> f64 {
    let min_sep = |pts: &[[f64; 2]]| {
        let mut m = f64::INFINITY;
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                m = m.min((pts[a][0] - pts[b][0]).hypot(pts[a][1] - pts[b][1]));
            }
        }
        m
    };
    let stray = min_sep(&g.beam_positions_slm1) * g.l2p / g.l12;
    let spots = min_sep(&g.beam_positions_slm2);
    let r = stray.min(spots) / 2.0;
    if r.is_finite() {
        r
    } else {
        // a single beam: the pinhole only needs to cover the region
        g.region_radius
    }
}

impl IntensityRig for PhysicalRig {
    fn dim(&self) -> usize {
        self.n()
    }

    fn set_splitting(&mut self, programmed: &DMatrix<Complex64>) -> Result<()> {
        let n = self.n();
        if programmed.shape() != (n, n) {
            return Err(dim("programmed matrix shape differs from the rig"));
        }
        if programmed.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite splitting weight"));
        }
        self.programmed = programmed.clone();
        self.refresh_slm1()
    }

    fn set_input_gains(&mut self, gains: &[f64]) -> Result<()> {
        if gains.len() != self.n() {
            return Err(dim("input gain count differs from the rig"));
        }
        if gains.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(invalid("input gains must be finite and nonnegative"));
        }
        self.gains = gains.to_vec();
        self.refresh_slm0()
    }

    fn measure(&mut self, input: &[Complex64]) -> Result<Vec<f64>> {
        let mags: Vec<f64> = input.iter().map(|v| v.norm()).filter(|m| *m > 0.0).collect();
        let Some(&m0) = mags.first() else {
            return self.intensities(input);
        };
        if mags.iter().any(|m| (m - m0).abs() > 1e-9 * m0) {
            return Err(invalid("the physical rig encodes inputs as phases; nonzero entries need equal magnitude"));
        }
        Ok(self.intensities(input)?.into_iter().map(|v| v * m0 * m0).collect())
    }
}

/// A rig calibrated for one spectral transform, ready to score spin states.
#[derive(Debug)]
pub struct CompiledRig {
    pub rig: PhysicalRig,
    pub sign_mask: Vec<EigenSign>,
    /// Output intensity per unit `|A·σ|²`.
    pub scale: f64,
}

/// Programs `|A|` (rows `√|λ|·q`) onto the rig and calibrates it.
pub fn compile_rig(
    config: RigConfig,
    transform: &SpectralTransform,
    plan: &CalibrationPlan,
) -> Result<(CompiledRig, CalibrationReport)> {
    if config.geometry.n() != transform.n() {
        return Err(dim(format!("rig has {} regions, transform has {} spins", config.geometry.n(), transform.n())));
    }
    let mut rig = PhysicalRig::new(config)?;
    let target = physical_target(transform);
    let report = calibrate(&mut rig, &target, plan)?;
    rig.set_splitting(&report.programmed)?;
    rig.set_input_gains(&report.tables.slm0_input)?;
    let scale = report.tables.intensity_scale;
    Ok((CompiledRig { rig, sign_mask: transform.sign_mask().to_vec(), scale }, report))
}

/// Real matrix `√|D|·Q`; the sign of each eigenvalue is applied after detection.
pub fn physical_target(transform: &SpectralTransform) -> DMatrix<Complex64> {
    // each entry of A is purely real or purely imaginary
    transform.a().map(|v| Complex64::new(v.re + v.im, 0.0))
}

/// Optional camera for the physical tier.
#[derive(Debug, Clone)]
pub struct PhysicalDetector {
    pub model: DetectorModel,
    /// Electrons per unit rig intensity.
    pub exposure_scale: f64,
}

/// Scores `s` through the full chain: region phases `σ_n`, detection,
/// signed-sum Hamiltonian. Returns the Hamiltonian (in `|A·σ|²` units) and
/// the pinhole-masked detection-plane intensity.
pub fn physical_evaluate<R: Rng + ?Sized>(
    s: &SpinState,
    rig: &CompiledRig,
    detector: Option<&PhysicalDetector>,
    rng: &mut R,
) -> Result<(Evaluation, FieldGrid)> {
    let x: Vec<Complex64> = s.as_f64().into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    let u = rig.rig.render(&x)?;
    let i = rig.rig.read(&u);
    let (readings, saturated) = match detector {
        None => (i.clone(), false),
        Some(d) => {
            let det = detect(&i, &d.model, d.exposure_scale, rng)?;
            (det.electrons.iter().map(|e| e / d.exposure_scale).collect(), det.saturated)
        }
    };
    let h = hamiltonian_from_readings(&readings, &rig.sign_mask, rig.scale)?;
    let mut img = u;
    img.zip_mut_with(&rig.rig.pinhole, |v, m| *v *= *m);
    let g = rig.rig.grid.pitch;
    Ok((Evaluation { h, intensities: Some(readings), saturated }, FieldGrid::new(img, g, g)?))
}

/// Physical tier as a [`HamiltonianEvaluator`]; the compiled rig is shared.
#[derive(Debug, Clone)]
pub struct PhysicalOptical {
    rig: Arc<CompiledRig>,
    detector: Option<PhysicalDetector>,
    rng: ChaCha8Rng,
}

impl PhysicalOptical {
    pub fn new(rig: Arc<CompiledRig>, detector: Option<PhysicalDetector>, seed: u64) -> Self {
        Self { rig, detector, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl HamiltonianEvaluator for PhysicalOptical {
    fn n(&self) -> usize {
        self.rig.rig.n()
    }

    fn evaluate(&mut self, s: &SpinState) -> Result<Evaluation> {
        physical_evaluate(s, &self.rig, self.detector.as_ref(), &mut self.rng).map(|(e, _)| e)
    }
}
