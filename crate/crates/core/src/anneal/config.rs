use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::ising::{hamiltonian_exact, IsingModel, SpinState};

/// Geometric annealing schedule and flip-count scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealConfig {
    /// Initial temperature in the evaluator's Hamiltonian units.
    pub t0: f64,
    pub n_step: usize,
    pub n_temp: usize,
    pub eta: f64,
    /// Cauchy scale per unit temperature (units of 1/H).
    pub alpha: f64,
    pub seed: u64,
}

/// `α` such that `α·t0 = n/8`.
pub fn default_alpha(n: usize, t0: f64) -> f64 {
    n as f64 / (8.0 * t0)
}

/// Twice the mean `|H|` over 32 random states.
pub fn default_t0(model: &IsingModel, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let mut acc = 0.0;
    for _ in 0..32 {
        acc += hamiltonian_exact(model, &SpinState::random(model.n(), &mut rng))?.abs();
    }
    let t0 = 2.0 * acc / 32.0;
    if t0 > 0.0 {
        Ok(t0)
    } else {
        Err(invalid("model has zero Hamiltonian on every probe; set t0 explicitly"))
    }
}

impl AnnealConfig {
    /// Fills `t0` and `alpha` with their defaults.
    pub fn with_defaults(model: &IsingModel, n_step: usize, n_temp: usize, eta: f64, seed: u64) -> Result<Self> {
        let t0 = default_t0(model, seed)?;
        let cfg = Self { t0, n_step, n_temp, eta, alpha: default_alpha(model.n(), t0), seed };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Explicit `t0`, default `alpha`.
    pub fn with_t0(n: usize, t0: f64, n_step: usize, n_temp: usize, eta: f64, seed: u64) -> Result<Self> {
        let cfg = Self { t0, n_step, n_temp, eta, alpha: default_alpha(n, t0), seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(invalid("t0 must be positive"));
        }
        if self.n_step == 0 || self.n_temp == 0 {
            return Err(invalid("n_step and n_temp must be >= 1"));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(invalid("eta must lie in (0, 1)"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha must be positive"));
        }
        Ok(())
    }

    pub fn iterations(&self) -> usize {
        self.n_step * self.n_temp
    }

    /// Temperature of stage `i` under repeated multiplication by `eta`.
    pub fn temperature(&self, stage: usize) -> f64 {
        let mut t = self.t0;
        for _ in 0..stage {
            t *= self.eta;
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::mobius_ladder;

    #[test]
    fn defaults_are_consistent() {
        let m = mobius_ladder(20).unwrap();
        let cfg = AnnealConfig::with_defaults(&m, 30, 20, 0.9, 5).unwrap();
        assert!((cfg.alpha * cfg.t0 - 2.5).abs() < 1e-12);
        assert_eq!(cfg.iterations(), 600);
    }

    #[test]
    fn validation() {
        let ok = AnnealConfig::with_t0(4, 1.0, 1, 1, 0.5, 0).unwrap();
        for bad in [
            AnnealConfig { t0: 0.0, ..ok.clone() },
            AnnealConfig { n_step: 0, ..ok.clone() },
            AnnealConfig { eta: 1.0, ..ok.clone() },
            AnnealConfig { alpha: -1.0, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn schedule_matches_power() {
        let cfg = AnnealConfig::with_t0(4, 3.0, 1, 40, 0.93, 0).unwrap();
        for i in 0..40 {
            let p = 3.0 * 0.93f64.powi(i as i32);
            assert!((cfg.temperature(i) - p).abs() <= 1e-12 * p);
        }
    }
}
