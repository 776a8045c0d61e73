use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::detector::{detect, DetectorModel};
use crate::error::{dim, invalid, Result};
use crate::ising::{hamiltonian_exact, EigenSign, IsingModel, SpectralTransform, SpinState};

/// One Hamiltonian reading.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub h: f64,
    pub intensities: Option<Vec<f64>>,
    pub saturated: bool,
}

impl Evaluation {
    fn plain(h: f64) -> Self {
        Self { h, intensities: None, saturated: false }
    }
}

/// Anything that maps a spin state to a Hamiltonian value.
pub trait HamiltonianEvaluator {
    fn n(&self) -> usize;
    fn evaluate(&mut self, s: &SpinState) -> Result<Evaluation>;
}

impl<E: HamiltonianEvaluator + ?Sized> HamiltonianEvaluator for Box<E> {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn evaluate(&mut self, s: &SpinState) -> Result<Evaluation> {
        (**self).evaluate(s)
    }
}

/// Quadratic-form oracle.
#[derive(Debug, Clone)]
pub struct ExactEvaluator {
    model: Arc<IsingModel>,
}

impl ExactEvaluator {
    pub fn new(model: Arc<IsingModel>) -> Self {
        Self { model }
    }
}

impl HamiltonianEvaluator for ExactEvaluator {
    fn n(&self) -> usize {
        self.model.n()
    }
    fn evaluate(&mut self, s: &SpinState) -> Result<Evaluation> {
        hamiltonian_exact(&self.model, s).map(Evaluation::plain)
    }
}

/// `E = A·σ` with unit input amplitude.
pub fn ovmm_ideal(t: &SpectralTransform, s: &SpinState) -> Result<Vec<Complex64>> {
    let n = t.n();
    if s.len() != n {
        return Err(dim(format!("spin state has {} entries, transform has {n}", s.len())));
    }
    let a = t.a();
    Ok((0..n)
        .map(|r| (0..n).map(|c| a[(r, c)] * f64::from(s.get(c))).sum())
        .collect())
}

/// `H = (Σ_neg I − Σ_nonneg I)/(2·scale)`; intensities must be nonnegative.
pub fn hamiltonian_from_intensities(i_vec: &[f64], sign_mask: &[EigenSign], scale: f64) -> Result<f64> {
    if let Some(v) = i_vec.iter().find(|v| !(**v >= 0.0)) {
        return Err(invalid(format!("negative or non-finite intensity {v}")));
    }
    hamiltonian_from_readings(i_vec, sign_mask, scale)
}

/// Signed-sum rule on offset-corrected readings, which may dip below zero.
pub fn hamiltonian_from_readings(readings: &[f64], sign_mask: &[EigenSign], scale: f64) -> Result<f64> {
    if readings.len() != sign_mask.len() {
        return Err(dim(format!("{} readings for {} eigenvalues", readings.len(), sign_mask.len())));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid("scale must be positive"));
    }
    let mut acc = 0.0;
    for (v, s) in readings.iter().zip(sign_mask) {
        if !v.is_finite() {
            return Err(invalid("non-finite reading"));
        }
        match s {
            EigenSign::Negative => acc += v,
            EigenSign::Nonnegative => acc -= v,
        }
    }
    Ok(acc / (2.0 * scale))
}

fn intensities(t: &SpectralTransform, s: &SpinState) -> Result<Vec<f64>> {
    Ok(ovmm_ideal(t, s)?.iter().map(|e| e.norm_sqr()).collect())
}

/// Noise-free intensity tier.
#[derive(Debug, Clone)]
pub struct IdealOptical {
    transform: Arc<SpectralTransform>,
}

impl IdealOptical {
    pub fn new(transform: Arc<SpectralTransform>) -> Self {
        Self { transform }
    }
}

impl HamiltonianEvaluator for IdealOptical {
    fn n(&self) -> usize {
        self.transform.n()
    }
    fn evaluate(&mut self, s: &SpinState) -> Result<Evaluation> {
        let i = intensities(&self.transform, s)?;
        let h = hamiltonian_from_intensities(&i, self.transform.sign_mask(), 1.0)?;
        Ok(Evaluation { h, intensities: Some(i), saturated: false })
    }
}

/// Ideal intensities through a camera; `H` is reported in electrons.
pub fn noisy_hamiltonian<R: rand::Rng + ?Sized>(
    t: &SpectralTransform,
    s: &SpinState,
    det: &DetectorModel,
    exposure_scale: f64,
    rng: &mut R,
) -> Result<f64> {
    let i = intensities(t, s)?;
    let d = detect(&i, det, exposure_scale, rng)?;
    hamiltonian_from_readings(&d.electrons, t.sign_mask(), 1.0)
}

/// Noisy tier owning its RNG stream.
#[derive(Debug, Clone)]
pub struct NoisyOptical {
    transform: Arc<SpectralTransform>,
    detector: DetectorModel,
    exposure_scale: f64,
    rng: ChaCha8Rng,
}

impl NoisyOptical {
    pub fn new(transform: Arc<SpectralTransform>, detector: DetectorModel, exposure_scale: f64, rng: ChaCha8Rng) -> Self {
        Self { transform, detector, exposure_scale, rng }
    }

    pub fn seeded(transform: Arc<SpectralTransform>, detector: DetectorModel, exposure_scale: f64, seed: u64) -> Self {
        Self::new(transform, detector, exposure_scale, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn exposure_scale(&self) -> f64 {
        self.exposure_scale
    }
}

impl HamiltonianEvaluator for NoisyOptical {
    fn n(&self) -> usize {
        self.transform.n()
    }
    fn evaluate(&mut self, s: &SpinState) -> Result<Evaluation> {
        let i = intensities(&self.transform, s)?;
        let d = detect(&i, &self.detector, self.exposure_scale, &mut self.rng)?;
        let h = hamiltonian_from_readings(&d.electrons, self.transform.sign_mask(), 1.0)?;
        Ok(Evaluation { h, intensities: Some(d.electrons), saturated: d.saturated })
    }
}

/// Exposure putting the brightest beam of `reference` exactly at full well.
pub fn exposure_for_dominant_beam(t: &SpectralTransform, reference: &SpinState, det: &DetectorModel) -> Result<f64> {
    let max = intensities(t, reference)?.into_iter().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(invalid("reference state produces no light"));
    }
    Ok(det.full_well() / max)
}

/// Largest exposure that keeps every beam of every spin state within the well,
/// from `|Σ_j A_ij σ_j|² ≤ (Σ_j |A_ij|)²`.
pub fn exposure_unsaturated(t: &SpectralTransform, det: &DetectorModel) -> Result<f64> {
    let a = t.a();
    let bound = a.row_iter().map(|row| row.iter().map(|v| v.norm()).sum::<f64>().powi(2)).fold(0.0, f64::max);
    if bound <= 0.0 {
        return Err(invalid("transform produces no light"));
    }
    Ok(det.full_well() / bound)
}

/// Exposure mapping the theoretical `h_reference` onto `h0` electrons.
pub fn exposure_for_ground_hamiltonian(h0_electrons: f64, h_reference: f64) -> Result<f64> {
    if h_reference == 0.0 || h0_electrons == 0.0 {
        return Err(invalid("Hamiltonians for the exposure convention must be nonzero"));
    }
    Ok((h0_electrons / h_reference).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{mobius_ladder, random_glass, spectral_transform};

    #[test]
    fn unsaturated_exposure_bounds_every_state() {
        let model = crate::ising::random_glass(8, 4).unwrap();
        let t = crate::ising::spectral_transform(&model, None).unwrap();
        let det = DetectorModel::scmos_default();
        let c = exposure_unsaturated(&t, &det).unwrap();
        let brightest = (0..256u64)
            .flat_map(|b| intensities(&t, &SpinState::from_index(8, b)).unwrap())
            .fold(0.0, f64::max);
        assert!(c * brightest <= det.full_well() * (1.0 + 1e-12));
        assert!(c * brightest > 0.2 * det.full_well());
    }

    #[test]
    fn intensities_rule_edge_cases() {
        let mask = [EigenSign::Negative, EigenSign::Nonnegative];
        assert_eq!(hamiltonian_from_intensities(&[0.0, 0.0], &mask, 1.0).unwrap(), 0.0);
        assert_eq!(hamiltonian_from_intensities(&[4.0, 2.0], &mask, 2.0).unwrap(), 0.5);
        assert!(hamiltonian_from_intensities(&[-1.0, 0.0], &mask, 1.0).is_err());
        assert!(hamiltonian_from_intensities(&[1.0], &mask, 1.0).is_err());
        assert!(hamiltonian_from_intensities(&[1.0, 1.0], &mask, 0.0).is_err());
        assert_eq!(hamiltonian_from_readings(&[-1.0, 0.0], &mask, 1.0).unwrap(), -0.5);
    }

    #[test]
    fn zero_coupling_gives_dark_output() {
        let m = IsingModel::symmetrize(&nalgebra::DMatrix::zeros(4, 4)).unwrap();
        let t = spectral_transform(&m, None).unwrap();
        let e = ovmm_ideal(&t, &SpinState::all_up(4)).unwrap();
        assert!(e.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn output_rows_are_real_or_imaginary() {
        let m = random_glass(8, 3).unwrap();
        let t = spectral_transform(&m, None).unwrap();
        let e = ovmm_ideal(&t, &SpinState::from_index(8, 0b1011_0010)).unwrap();
        for (v, s) in e.iter().zip(t.sign_mask()) {
            match s {
                EigenSign::Negative => assert_eq!(v.re, 0.0),
                EigenSign::Nonnegative => assert_eq!(v.im, 0.0),
            }
        }
    }

    #[test]
    fn noiseless_detector_scales_exact() {
        let m = random_glass(8, 4).unwrap();
        let t = spectral_transform(&m, None).unwrap();
        let det = DetectorModel::noiseless(1e9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for bits in [0u64, 17, 200] {
            let s = SpinState::from_index(8, bits);
            let h = noisy_hamiltonian(&t, &s, &det, 1234.5, &mut rng).unwrap();
            let exact = hamiltonian_exact(&m, &s).unwrap();
            assert!((h - 1234.5 * exact).abs() <= 1e-9 * (1234.5 * exact).abs().max(1.0));
        }
    }

    #[test]
    fn mobius_ground_state_intensities() {
        let m = mobius_ladder(20).unwrap();
        let t = spectral_transform(&m, None).unwrap();
        let (gs, _) = crate::ising::brute_force_ground(&m).unwrap();
        let mut ideal = IdealOptical::new(Arc::new(t));
        assert!((ideal.evaluate(&gs).unwrap().h + 26.0).abs() < 1e-9);
    }
}
