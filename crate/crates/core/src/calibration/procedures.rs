use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::IntensityRig;
use crate::error::{dim, invalid, Result};
use crate::optics::fidelity_matrix;

fn unit(n: usize, k: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[k] = Complex64::new(1.0, 0.0);
    v
}

fn wrap(p: f64) -> f64 {
    let w = (p + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        PI
    } else {
        w
    }
}

/// Relative phases recovered by the four-measurement protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCalibration {
    /// `Δφ_ij = ψ_i0 − ψ_i,j+1`, the measured phase of output `i` from input 0
    /// minus that from input `j+1`; `n × (n−1)`, in `(−π, π]`.
    pub delta_phi: DMatrix<f64>,
    /// Entries whose reference intensities vanished; their `Δφ` is 0.
    pub unmeasurable: Vec<(usize, usize)>,
    /// Largest `|cos argument| − 1` clamped away.
    pub max_excursion: f64,
}

/// Measures within-row phase differences of the currently programmed transform.
///
/// For each input `j+1`: `M1` with inputs 0 and `j+1`, `M2` with input `j+1`
/// shifted by π/2, `M3`/`M4` with each input alone; then
/// `Δφ = ±arccos((M1 − M3 − M4)/(2√(M3·M4)))` with the sign of `M2 − M3 − M4`.
pub fn phase_calibrate<R: IntensityRig + ?Sized>(rig: &mut R) -> Result<PhaseCalibration> {
    let n = rig.dim();
    if n < 2 {
        return Err(invalid("phase calibration needs at least two inputs"));
    }
    let one = Complex64::new(1.0, 0.0);
    let m3 = rig.measure(&unit(n, 0))?;
    let mut delta_phi = DMatrix::zeros(n, n - 1);
    let mut unmeasurable = Vec::new();
    let mut max_excursion: f64 = 0.0;
    for j in 0..n - 1 {
        let m4 = rig.measure(&unit(n, j + 1))?;
        let mut x = unit(n, 0);
        x[j + 1] = one;
        let m1 = rig.measure(&x)?;
        x[j + 1] = Complex64::new(0.0, 1.0);
        let m2 = rig.measure(&x)?;
        let peak = m3.iter().chain(&m4).fold(0.0_f64, |a, b| a.max(*b));
        for i in 0..n {
            let prod = m3[i] * m4[i];
            if !(prod > 1e-24 * peak * peak) || m3[i] <= 0.0 || m4[i] <= 0.0 {
                unmeasurable.push((i, j));
                continue;
            }
            let arg = (m1[i] - m3[i] - m4[i]) / (2.0 * prod.sqrt());
            max_excursion = max_excursion.max(arg.abs() - 1.0);
            let mag = arg.clamp(-1.0, 1.0).acos();
            let sign = if m2[i] - m3[i] - m4[i] >= 0.0 { 1.0 } else { -1.0 };
            delta_phi[(i, j)] = wrap(sign * mag);
        }
    }
    Ok(PhaseCalibration { delta_phi, unmeasurable, max_excursion: max_excursion.max(0.0) })
}

/// Re-measures the programmed transform and nudges each entry's phase so
/// that within-row phase differences match `target`.
pub fn phase_refine<R: IntensityRig + ?Sized>(
    rig: &mut R,
    target: &DMatrix<Complex64>,
    programmed: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    let n = rig.dim();
    check_square(target, n)?;
    rig.set_splitting(programmed)?;
    let meas = phase_calibrate(rig)?;
    let mut out = programmed.clone();
    for i in 0..n {
        for j in 0..n - 1 {
            if meas.unmeasurable.contains(&(i, j)) || target[(i, 0)].norm() == 0.0 || target[(i, j + 1)].norm() == 0.0 {
                continue;
            }
            let want = target[(i, 0)].arg() - target[(i, j + 1)].arg();
            out[(i, j + 1)] *= Complex64::from_polar(1.0, wrap(meas.delta_phi[(i, j)] - want));
        }
    }
    rig.set_splitting(&out)?;
    Ok(out)
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(invalid("amplitude step must lie in (0, 1]"));
    }
    Ok(())
}

fn check_square(target: &DMatrix<Complex64>, n: usize) -> Result<()> {
    if target.shape() != (n, n) {
        return Err(dim(format!("target is {:?}, rig is {n}x{n}", target.shape())));
    }
    Ok(())
}

/// Intensity matrix with column `j` measured for input `e_j`.
fn identity_response<R: IntensityRig + ?Sized>(rig: &mut R) -> Result<DMatrix<f64>> {
    let n = rig.dim();
    let mut c = DMatrix::zeros(n, n);
    for j in 0..n {
        let col = rig.measure(&unit(n, j))?;
        for i in 0..n {
            c[(i, j)] = col[i];
        }
    }
    Ok(c)
}

/// `‖√C − S|A|‖_F` with the per-column scale `S` fitted by least squares.
fn amplitude_residual(c: &DMatrix<f64>, target: &DMatrix<Complex64>) -> f64 {
    let n = c.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        let a: Vec<f64> = (0..n).map(|i| target[(i, j)].norm()).collect();
        let s: Vec<f64> = (0..n).map(|i| c[(i, j)].max(0.0).sqrt()).collect();
        let aa: f64 = a.iter().map(|v| v * v).sum();
        let sa: f64 = a.iter().zip(&s).map(|(x, y)| x * y).sum();
        if aa == 0.0 || sa == 0.0 {
            continue;
        }
        let k = sa / aa;
        acc += a.iter().zip(&s).map(|(x, y)| (y / k - x).powi(2)).sum::<f64>();
    }
    acc.sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slm1Calibration {
    pub programmed: DMatrix<Complex64>,
    /// Entry 0 before any update, entry `k` after round `k`.
    pub residuals: Vec<f64>,
    /// Entries with `|A_ij| > 0` but no measured light.
    pub flagged: Vec<(usize, usize)>,
}

/// Rounds of `(A_SLM1)_ij ← (A_SLM1)_ij·(|A_ij|/√C_ij)^step`, with `C` measured
/// one input at a time. `step = 1` is the plain multiplicative update.
pub fn amplitude_calibrate_slm1<R: IntensityRig + ?Sized>(
    rig: &mut R,
    target: &DMatrix<Complex64>,
    programmed: &DMatrix<Complex64>,
    n_rounds: usize,
    step: f64,
) -> Result<Slm1Calibration> {
    check_step(step)?;
    let n = rig.dim();
    check_square(target, n)?;
    check_square(programmed, n)?;
    let mut prog = programmed.clone();
    rig.set_splitting(&prog)?;
    let mut c = identity_response(rig)?;
    let mut residuals = vec![amplitude_residual(&c, target)];
    let mut flagged = Vec::new();
    for _ in 0..n_rounds {
        flagged.clear();
        for i in 0..n {
            for j in 0..n {
                let a = target[(i, j)].norm();
                if a == 0.0 {
                    continue;
                }
                if c[(i, j)] <= 0.0 {
                    flagged.push((i, j));
                    continue;
                }
                prog[(i, j)] *= (a / c[(i, j)].sqrt()).powf(step);
            }
        }
        rig.set_splitting(&prog)?;
        c = identity_response(rig)?;
        residuals.push(amplitude_residual(&c, target));
    }
    Ok(Slm1Calibration { programmed: prog, residuals, flagged })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slm0Calibration {
    pub gains: Vec<f64>,
    /// Per round, `max_j r_j / min_j r_j − 1` with `r_j = √max_i F_ji / max_i |A_ij|`,
    /// measured before that round's update; the last entry is after the final round.
    pub spread: Vec<f64>,
    pub flagged: Vec<usize>,
}

/// Rounds of `(E_in)_j ← (E_in)_j·(max_i|A_ij|/√max_i (F_j)_i)^step`.
pub fn amplitude_calibrate_slm0<R: IntensityRig + ?Sized>(
    rig: &mut R,
    target: &DMatrix<Complex64>,
    initial_gains: &[f64],
    n_rounds: usize,
    step: f64,
) -> Result<Slm0Calibration> {
    check_step(step)?;
    let n = rig.dim();
    check_square(target, n)?;
    if initial_gains.len() != n {
        return Err(dim("initial gain count differs from the rig"));
    }
    let mut gains = initial_gains.to_vec();
    rig.set_input_gains(&gains)?;
    let mut spread = Vec::with_capacity(n_rounds + 1);
    let mut flagged = Vec::new();
    for round in 0..=n_rounds {
        let mut ratios = Vec::with_capacity(n);
        let mut next = gains.clone();
        flagged.clear();
        for j in 0..n {
            let f = rig.measure(&unit(n, j))?;
            let fmax = f.iter().fold(0.0_f64, |a, b| a.max(*b));
            let amax = (0..n).map(|i| target[(i, j)].norm()).fold(0.0, f64::max);
            if amax == 0.0 {
                continue;
            }
            if fmax <= 0.0 {
                flagged.push(j);
                continue;
            }
            ratios.push(fmax.sqrt() / amax);
            next[j] *= (amax / fmax.sqrt()).powf(step);
        }
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), r| (a.min(*r), b.max(*r)));
        spread.push(if ratios.is_empty() { 0.0 } else { hi / lo - 1.0 });
        if round < n_rounds {
            gains = next;
            rig.set_input_gains(&gains)?;
        }
    }
    Ok(Slm0Calibration { gains, spread, flagged })
}

/// Least-squares `s` in `C ≈ s·|A|²` for the identity response.
pub fn fit_intensity_scale<R: IntensityRig + ?Sized>(rig: &mut R, target: &DMatrix<Complex64>) -> Result<f64> {
    check_square(target, rig.dim())?;
    let c = identity_response(rig)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (ci, a) in c.iter().zip(target.iter()) {
        let a2 = a.norm_sqr();
        num += ci * a2;
        den += a2 * a2;
    }
    if !(num > 0.0 && den > 0.0) {
        return Err(invalid("no light reaches the outputs"));
    }
    Ok(num / den)
}

/// Number of rounds per stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationPlan {
    pub slm1_rounds: usize,
    pub slm0_rounds: usize,
    /// Extra passes of phase measurement on the target pattern, one SLM1 round
    /// and one SLM0 round; a last phase measurement closes the sequence.
    #[serde(default)]
    pub phase_refinements: usize,
    /// Exponent applied to every amplitude correction ratio.
    #[serde(default = "one")]
    pub amplitude_step: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for CalibrationPlan {
    fn default() -> Self {
        Self { slm1_rounds: 4, slm0_rounds: 4, phase_refinements: 0, amplitude_step: 1.0 }
    }
}

impl CalibrationPlan {
    /// For diffraction rigs, where phase-only splitting couples the amplitude
    /// and phase of every beam in a pattern: damped amplitude steps and
    /// repeated phase passes.
    pub fn diffraction() -> Self {
        Self { slm1_rounds: 4, slm0_rounds: 4, phase_refinements: 6, amplitude_step: 0.5 }
    }
}

/// Serializable correction tables (phases in radians, amplitude corrections as ratios).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTables {
    pub delta_phi: Vec<Vec<f64>>,
    /// `|programmed_ij| / |target_ij|`; 1 where the target vanishes.
    pub slm1_amplitude: Vec<Vec<f64>>,
    pub slm0_input: Vec<f64>,
    /// Output intensity per unit `|A·x|²` after calibration.
    pub intensity_scale: f64,
}

#[derive(Debug, Clone)]
pub struct CalibrationReport {
    pub tables: CalibrationTables,
    pub programmed: DMatrix<Complex64>,
    pub phase: PhaseCalibration,
    pub slm1: Slm1Calibration,
    pub slm0: Slm0Calibration,
}

/// Phase calibration on an all-ones pattern, then SLM1 and SLM0 amplitude
/// rounds towards `target`, optional phase refinement, and a final scale fit.
pub fn calibrate<R: IntensityRig + ?Sized>(
    rig: &mut R,
    target: &DMatrix<Complex64>,
    plan: &CalibrationPlan,
) -> Result<CalibrationReport> {
    let n = rig.dim();
    check_square(target, n)?;
    let ones = DMatrix::from_element(n, n, Complex64::new(1.0, 0.0));
    rig.set_input_gains(&vec![1.0; n])?;
    rig.set_splitting(&ones)?;
    let phase = phase_calibrate(rig)?;
    let programmed = DMatrix::from_fn(n, n, |i, j| {
        if j == 0 {
            target[(i, 0)]
        } else {
            target[(i, j)] * Complex64::from_polar(1.0, phase.delta_phi[(i, j - 1)])
        }
    });
    let step = plan.amplitude_step;
    let mut slm1 = amplitude_calibrate_slm1(rig, target, &programmed, plan.slm1_rounds, step)?;
    let mut slm0 = amplitude_calibrate_slm0(rig, target, &vec![1.0; n], plan.slm0_rounds, step)?;
    for pass in 0..plan.phase_refinements {
        let refined = phase_refine(rig, target, &slm1.programmed)?;
        let more = amplitude_calibrate_slm1(rig, target, &refined, 1, step)?;
        slm1.residuals.extend_from_slice(&more.residuals[1..]);
        slm1.programmed = more.programmed;
        slm1.flagged = more.flagged;
        let more = amplitude_calibrate_slm0(rig, target, &slm0.gains, 1, step)?;
        slm0.spread.extend_from_slice(&more.spread[1..]);
        slm0.gains = more.gains;
        slm0.flagged = more.flagged;
        if pass + 1 == plan.phase_refinements {
            slm1.programmed = phase_refine(rig, target, &slm1.programmed)?;
        }
    }
    let intensity_scale = fit_intensity_scale(rig, target)?;
    let tables = CalibrationTables {
        delta_phi: rows_of(&phase.delta_phi),
        slm1_amplitude: (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let t = target[(i, j)].norm();
                        if t == 0.0 {
                            1.0
                        } else {
                            slm1.programmed[(i, j)].norm() / t
                        }
                    })
                    .collect()
            })
            .collect(),
        slm0_input: slm0.gains.clone(),
        intensity_scale,
    };
    Ok(CalibrationReport { tables, programmed: slm1.programmed.clone(), phase, slm1, slm0 })
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// `W_jk = ω^{jk}/√n`, `ω = e^{−2πi/n}`.
pub fn dft_matrix(n: usize) -> DMatrix<Complex64> {
    let s = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |j, k| Complex64::from_polar(s, -2.0 * PI * ((j * k) % n) as f64 / n as f64))
}

/// Feeds the columns of `Wᴴ` through the rig as currently programmed and
/// scores the output intensity matrix against the identity.
pub fn dft_benchmark<R: IntensityRig + ?Sized>(rig: &mut R) -> Result<f64> {
    let n = rig.dim();
    let w = dft_matrix(n);
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        let x: Vec<Complex64> = (0..n).map(|j| w[(k, j)].conj()).collect();
        let col = rig.measure(&x)?;
        for i in 0..n {
            out[(i, k)] = col[i];
        }
    }
    fidelity_matrix(&DMatrix::identity(n, n), &out)
}
