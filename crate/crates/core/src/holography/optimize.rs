use ndarray::{Array2, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::FieldGrid;
use super::modulation::Hologram;
use super::propagate::Propagator;
use crate::error::{dim, invalid, Result};

/// Adam settings for hologram refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    pub wavelength: f64,
    /// Huber threshold; `None` uses `0.1·max|u_target|`.
    pub delta: Option<f64>,
    pub iters: usize,
    pub step: f64,
    /// Consecutive loss increases tolerated before stopping.
    pub patience: usize,
    pub pixel_aperture: bool,
}

impl OptimizerOptions {
    pub fn new(wavelength: f64) -> Self {
        Self { wavelength, delta: None, iters: 500, step: 0.01, patience: 25, pixel_aperture: false }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    /// Best pattern seen.
    pub hologram: Hologram,
    pub initial_loss: f64,
    pub best_loss: f64,
    pub losses: Vec<f64>,
    /// Stopped because the loss kept rising.
    pub diverged: bool,
}

/// Huber loss of `T(N(P)⊙U_I) − U_T` and its gradient with respect to `P`.
#[derive(Debug)]
pub struct HologramObjective<'a> {
    propagator: &'a Propagator,
    incident: &'a Array2<Complex64>,
    target: &'a Array2<Complex64>,
    delta: f64,
}

impl<'a> HologramObjective<'a> {
    pub fn new(propagator: &'a Propagator, incident: &'a Array2<Complex64>, target: &'a Array2<Complex64>, delta: f64) -> Result<Self> {
        if incident.dim() != propagator.shape() || target.dim() != propagator.shape() {
            return Err(dim("incident, target and propagator shapes differ"));
        }
        if !(delta > 0.0) {
            return Err(invalid("Huber threshold must be positive"));
        }
        Ok(Self { propagator, incident, target, delta })
    }

    fn residual(&self, p: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        let mut x = normalize(p);
        x.zip_mut_with(self.incident, |a, u| *a *= u);
        let mut d = self.propagator.forward(&x)?;
        d.zip_mut_with(self.target, |a, t| *a -= t);
        Ok(d)
    }

    pub fn loss(&self, p: &Array2<Complex64>) -> Result<f64> {
        Ok(self.residual(p)?.iter().map(|d| huber(d.norm(), self.delta)).sum())
    }

    /// Loss and the Wirtinger derivative `∂L/∂P*`; the real gradient is
    /// `(2·Re, 2·Im)` of the latter.
    pub fn loss_and_gradient(&self, p: &Array2<Complex64>) -> Result<(f64, Array2<Complex64>)> {
        let d = self.residual(p)?;
        let loss = d.iter().map(|v| huber(v.norm(), self.delta)).sum();
        let dl_dd = d.mapv(|v| {
            let m = v.norm();
            if m <= self.delta {
                0.5 * v
            } else {
                v * (self.delta / (2.0 * m))
            }
        });
        let g = self.propagator.adjoint(&dl_dd)?;
        let mut out = Array2::zeros(p.dim());
        Zip::from(&mut out).and(p).and(self.incident).and(&g).for_each(|o, &pv, &u, &gv| {
            let m = pv.norm().max(1e-300);
            *o = gv.conj() * u * (-(pv * pv) / (2.0 * m * m * m)) + gv * u.conj() / (2.0 * m);
        });
        Ok((loss, out))
    }

    /// Output field of the phase-only pattern `N(P)`.
    pub fn output(&self, p: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        let mut x = normalize(p);
        x.zip_mut_with(self.incident, |a, u| *a *= u);
        self.propagator.forward(&x)
    }
}

fn huber(m: f64, delta: f64) -> f64 {
    if m <= delta {
        0.5 * m * m
    } else {
        delta * (m - 0.5 * delta)
    }
}

fn normalize(p: &Array2<Complex64>) -> Array2<Complex64> {
    p.mapv(|v| {
        let m = v.norm();
        if m == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            v / m
        }
    })
}

/// Refines `p0` so that the field after distance `z` approaches `u_target`.
pub fn optimize_hologram(
    p0: &Hologram,
    u_incident: &FieldGrid,
    u_target: &FieldGrid,
    z: f64,
    opts: &OptimizerOptions,
) -> Result<OptimizeOutcome> {
    if p0.phase.dim() != u_incident.samples.dim() || u_target.samples.dim() != u_incident.samples.dim() {
        return Err(dim("hologram, incident and target grids differ in shape"));
    }
    if !(opts.step > 0.0) {
        return Err(invalid("step must be positive"));
    }
    let prop = Propagator::for_grid(u_incident, z, opts.wavelength, opts.pixel_aperture)?;
    let max_t = u_target.samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let delta = opts.delta.unwrap_or(0.1 * max_t);
    if !(delta > 0.0) {
        return Err(invalid("target field is zero; set an explicit Huber threshold"));
    }
    let obj = HologramObjective::new(&prop, &u_incident.samples, &u_target.samples, delta)?;

    let mut p = p0.transmission();
    let (b1, b2, eps): (f64, f64, f64) = (0.9, 0.999, 1e-8);
    let mut m_re = Array2::<f64>::zeros(p.dim());
    let mut m_im = Array2::<f64>::zeros(p.dim());
    let mut v_re = Array2::<f64>::zeros(p.dim());
    let mut v_im = Array2::<f64>::zeros(p.dim());
    let mut losses = Vec::with_capacity(opts.iters + 1);
    let (initial_loss, mut grad) = obj.loss_and_gradient(&p)?;
    losses.push(initial_loss);
    let mut best = (initial_loss, p.clone());
    let mut rising = 0;
    let mut diverged = false;

    for t in 1..=opts.iters {
        let (c1, c2) = (1.0 - b1.powi(t as i32), 1.0 - b2.powi(t as i32));
        Zip::from(&mut p)
            .and(&grad)
            .and(&mut m_re)
            .and(&mut m_im)
            .and(&mut v_re)
            .and(&mut v_im)
            .for_each(|pv, g, mr, mi, vr, vi| {
                let (gr, gi) = (2.0 * g.re, 2.0 * g.im);
                *mr = b1 * *mr + (1.0 - b1) * gr;
                *mi = b1 * *mi + (1.0 - b1) * gi;
                *vr = b2 * *vr + (1.0 - b2) * gr * gr;
                *vi = b2 * *vi + (1.0 - b2) * gi * gi;
                pv.re -= opts.step * (*mr / c1) / ((*vr / c2).sqrt() + eps);
                pv.im -= opts.step * (*mi / c1) / ((*vi / c2).sqrt() + eps);
            });
        let (loss, g) = obj.loss_and_gradient(&p)?;
        grad = g;
        if loss > *losses.last().expect("nonempty") {
            rising += 1;
        } else {
            rising = 0;
        }
        losses.push(loss);
        if loss < best.0 {
            best = (loss, p.clone());
        }
        if !loss.is_finite() || rising >= opts.patience {
            diverged = true;
            break;
        }
    }
    let hologram = Hologram::new(normalize(&best.1).mapv(|v| v.arg()), p0.pitch)?;
    Ok(OptimizeOutcome { hologram, initial_loss, best_loss: best.0, losses, diverged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 16;
        let prop = Propagator::new(n, n, 2e-5, 2e-5, 0.02, 1.55e-6, true).unwrap();
        let inc = FieldGrid::gaussian(n, n, 2e-5, 2e-5, 1e-4, (0.0, 0.0)).unwrap().samples;
        let target = Array2::from_shape_fn((n, n), |_| Complex64::new(rng.random::<f64>() * 0.01, rng.random::<f64>() * 0.01));
        let p = Array2::from_shape_fn((n, n), |_| Complex64::from_polar(0.5 + rng.random::<f64>(), rng.random::<f64>() * 6.0));
        let obj = HologramObjective::new(&prop, &inc, &target, 2e-3).unwrap();
        let (_, g) = obj.loss_and_gradient(&p).unwrap();
        let h = 1e-6;
        for _ in 0..10 {
            let (r, c) = (rng.random_range(0..n), rng.random_range(0..n));
            for (axis, analytic) in [(Complex64::new(h, 0.0), 2.0 * g[[r, c]].re), (Complex64::new(0.0, h), 2.0 * g[[r, c]].im)] {
                let mut pp = p.clone();
                pp[[r, c]] += axis;
                let lp = obj.loss(&pp).unwrap();
                pp[[r, c]] -= 2.0 * axis;
                let lm = obj.loss(&pp).unwrap();
                let fd = (lp - lm) / (2.0 * h);
                assert!((fd - analytic).abs() <= 1e-5 * analytic.abs().max(1e-12), "fd {fd} vs analytic {analytic}");
            }
        }
    }

    #[test]
    fn self_target_is_fixed_point() {
        let n = 16;
        let inc = FieldGrid::gaussian(n, n, 2e-5, 2e-5, 1e-4, (0.0, 0.0)).unwrap();
        let p0 = Hologram::new(Array2::from_shape_fn((n, n), |(r, c)| (r as f64 * 0.3 + c as f64 * 0.1).sin()), 2e-5).unwrap();
        let prop = Propagator::for_grid(&inc, 0.02, 1.55e-6, false).unwrap();
        let mut x = p0.transmission();
        x.zip_mut_with(&inc.samples, |a, u| *a *= u);
        let target = FieldGrid::new(prop.forward(&x).unwrap(), 2e-5, 2e-5).unwrap();
        let out = optimize_hologram(&p0, &inc, &target, 0.02, &OptimizerOptions { iters: 20, ..OptimizerOptions::new(1.55e-6) }).unwrap();
        assert!(out.initial_loss < 1e-20);
        assert!(out.best_loss <= out.initial_loss);
        let drift = out.hologram.phase.iter().zip(p0.phase.iter())
            .map(|(a, b)| (Complex64::from_polar(1.0, *a) - Complex64::from_polar(1.0, *b)).norm())
            .fold(0.0, f64::max);
        assert!(drift < 1e-9);
    }
}
