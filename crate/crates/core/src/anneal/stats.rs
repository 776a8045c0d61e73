use std::sync::Arc;

use super::config::AnnealConfig;
use super::engine::{run_replicas, AnnealResult};
use crate::error::{dim, invalid, Result};
use crate::ising::{brute_force_ground_capped, hamiltonian_exact, IsingModel, SpinState};
use crate::optics::ExactEvaluator;

/// `h` equals `h_min` up to round-off.
pub fn is_ground(h: f64, h_min: f64) -> bool {
    (h - h_min).abs() <= 1e-9 * h_min.abs().max(1.0)
}

/// Fraction of runs whose retained state sits at `h_min`, per iteration.
/// States are re-scored with the exact Hamiltonian.
pub fn ground_state_probability(results: &[AnnealResult], h_min: f64, model: &IsingModel) -> Result<Vec<f64>> {
    let Some(first) = results.first() else {
        return Err(invalid("no annealing results"));
    };
    let len = first.accepted_spins.len();
    if results.iter().any(|r| r.accepted_spins.len() != len) {
        return Err(dim("annealing traces have different lengths"));
    }
    let mut hits = vec![0usize; len];
    for r in results {
        let mut last: Option<(&SpinState, bool)> = None;
        for (k, s) in r.accepted_spins.iter().enumerate() {
            let ground = match last {
                Some((prev, g)) if prev == s => g,
                _ => is_ground(hamiltonian_exact(model, s)?, h_min),
            };
            hits[k] += usize::from(ground);
            last = Some((s, ground));
        }
    }
    Ok(hits.into_iter().map(|h| h as f64 / results.len() as f64).collect())
}

/// Reference minimum: brute force when `n ≤ cap`, otherwise the best of
/// `runs` independent exact-oracle anneals. The flag is true for brute force.
pub fn reference_minimum(model: &IsingModel, cfg: &AnnealConfig, runs: usize, cap: usize) -> Result<(SpinState, f64, bool)> {
    if model.n() <= cap {
        let (s, h) = brute_force_ground_capped(model, cap)?;
        return Ok((s, h, true));
    }
    let shared = Arc::new(model.clone());
    let results = run_replicas(model, cfg, runs.max(1), |_| Ok(ExactEvaluator::new(shared.clone())))?;
    let best = results
        .into_iter()
        .min_by(|a, b| a.best_h.total_cmp(&b.best_h))
        .expect("at least one run");
    Ok((best.best_state, best.best_h, false))
}
