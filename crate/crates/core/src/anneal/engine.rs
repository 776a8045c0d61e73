use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::AnnealConfig;
use super::sampling::{metropolis_accept, sample_flip_count};
use crate::error::{dim, Error, Result};
use crate::ising::{hamiltonian_exact, IsingModel, SpinState};
use crate::optics::HamiltonianEvaluator;

/// One proposal.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub stage: usize,
    pub temperature: f64,
    /// Indices flipped by the proposal (sorted).
    pub flips: Vec<usize>,
    pub proposed_h: f64,
    pub accepted: bool,
}

/// Trajectory of one annealing run.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealResult {
    pub initial_state: SpinState,
    pub initial_h: f64,
    pub initial_exact_h: f64,
    pub steps: Vec<StepRecord>,
    /// Evaluator Hamiltonian of the retained state after each iteration.
    pub accepted_h: Vec<f64>,
    /// Retained state after each iteration.
    pub accepted_spins: Vec<SpinState>,
    /// Exact Hamiltonian of `accepted_spins`.
    pub accepted_exact_h: Vec<f64>,
    /// Lowest exact Hamiltonian visited by the retained trace.
    pub best_state: SpinState,
    pub best_h: f64,
    pub final_state: SpinState,
    pub evaluations: usize,
}

impl AnnealResult {
    /// Rebuilds the retained trace from the initial state and the accepted flips.
    pub fn replay(&self) -> Vec<SpinState> {
        let mut s = self.initial_state.clone();
        self.steps
            .iter()
            .map(|st| {
                if st.accepted {
                    for &k in &st.flips {
                        s.flip(k);
                    }
                }
                s.clone()
            })
            .collect()
    }
}

/// Per-run RNG: ChaCha8 keyed by `seed`, stream `run`.
pub fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// Single run seeded from `cfg.seed` (stream 0).
pub fn anneal<E: HamiltonianEvaluator + ?Sized>(
    model: &IsingModel,
    evaluator: &mut E,
    cfg: &AnnealConfig,
    initial: Option<SpinState>,
) -> Result<AnnealResult> {
    anneal_with_rng(model, evaluator, cfg, initial, &mut run_rng(cfg.seed, 0))
}

pub fn anneal_with_rng<E: HamiltonianEvaluator + ?Sized, R: Rng + ?Sized>(
    model: &IsingModel,
    evaluator: &mut E,
    cfg: &AnnealConfig,
    initial: Option<SpinState>,
    rng: &mut R,
) -> Result<AnnealResult> {
    cfg.validate()?;
    let n = model.n();
    if evaluator.n() != n {
        return Err(dim(format!("evaluator has {} spins, model has {n}", evaluator.n())));
    }
    let initial_state = match initial {
        Some(s) if s.len() != n => return Err(dim("initial state length differs from model")),
        Some(s) => s,
        None => SpinState::random(n, rng),
    };
    let wrap = |iteration: usize| move |e: Error| Error::Evaluation { iteration, source: Box::new(e) };

    let mut state = initial_state.clone();
    let mut h = evaluator.evaluate(&state).map_err(wrap(0))?.h;
    let mut h_exact = hamiltonian_exact(model, &state)?;
    let initial_h = h;
    let initial_exact_h = h_exact;
    let iterations = cfg.iterations();
    let mut steps = Vec::with_capacity(iterations);
    let mut accepted_h = Vec::with_capacity(iterations);
    let mut accepted_spins = Vec::with_capacity(iterations);
    let mut accepted_exact_h = Vec::with_capacity(iterations);
    let mut best: Option<(f64, SpinState)> = None;
    let mut evaluations = 1;

    let mut t = cfg.t0;
    for stage in 0..cfg.n_temp {
        for _ in 0..cfg.n_step {
            let m = sample_flip_count(t, cfg.alpha, n, rng);
            let mut flips = sample(rng, n, m).into_vec();
            flips.sort_unstable();
            let mut next = state.clone();
            for &k in &flips {
                next.flip(k);
            }
            let iteration = steps.len() + 1;
            let h_next = evaluator.evaluate(&next).map_err(wrap(iteration))?.h;
            evaluations += 1;
            let accepted = metropolis_accept(h_next - h, t, rng);
            if accepted {
                state = next;
                h = h_next;
                h_exact = hamiltonian_exact(model, &state)?;
            }
            if best.as_ref().is_none_or(|(b, _)| h_exact < *b) {
                best = Some((h_exact, state.clone()));
            }
            steps.push(StepRecord { stage, temperature: t, flips, proposed_h: h_next, accepted });
            accepted_h.push(h);
            accepted_spins.push(state.clone());
            accepted_exact_h.push(h_exact);
        }
        t *= cfg.eta;
    }
    let (best_h, best_state) = best.expect("at least one iteration");
    Ok(AnnealResult {
        initial_state,
        initial_h,
        initial_exact_h,
        steps,
        accepted_h,
        accepted_spins,
        accepted_exact_h,
        best_state,
        best_h,
        final_state: state,
        evaluations,
    })
}

/// Independent runs in parallel; run `r` uses [`run_rng`]`(cfg.seed, r)` and its own evaluator.
pub fn run_replicas<E, F>(model: &IsingModel, cfg: &AnnealConfig, runs: usize, make_evaluator: F) -> Result<Vec<AnnealResult>>
where
    E: HamiltonianEvaluator,
    F: Fn(usize) -> Result<E> + Sync,
{
    (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut ev = make_evaluator(r)?;
            anneal_with_rng(model, &mut ev, cfg, None, &mut run_rng(cfg.seed, r as u64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::ising::{brute_force_ground, random_glass};
    use crate::optics::ExactEvaluator;

    #[test]
    fn frozen_at_ground_state() {
        let m = random_glass(10, 1).unwrap();
        let (gs, hmin) = brute_force_ground(&m).unwrap();
        let cfg = AnnealConfig::with_t0(10, 1e-300, 20, 5, 0.5, 3).unwrap();
        let mut ev = ExactEvaluator::new(Arc::new(m.clone()));
        let r = anneal(&m, &mut ev, &cfg, Some(gs.clone())).unwrap();
        assert!(r.accepted_exact_h.iter().all(|h| *h == hmin));
        assert_eq!(r.best_h, hmin);
    }

    #[test]
    fn trace_bookkeeping() {
        let m = random_glass(12, 2).unwrap();
        let cfg = AnnealConfig::with_defaults(&m, 10, 8, 0.8, 11).unwrap();
        let mut ev = ExactEvaluator::new(Arc::new(m.clone()));
        let r = anneal(&m, &mut ev, &cfg, None).unwrap();
        assert_eq!(r.evaluations, 81);
        assert_eq!(r.accepted_h.len(), 80);
        assert_eq!(r.replay(), r.accepted_spins);
        let min = r.accepted_exact_h.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(r.best_h, min);
        let mut prev = r.initial_h;
        for (st, h) in r.steps.iter().zip(&r.accepted_h) {
            assert_eq!(st.temperature, cfg.temperature(st.stage));
            if st.accepted && st.proposed_h <= prev {
                assert!(*h <= prev);
            }
            if !st.accepted {
                assert_eq!(*h, prev);
            }
            prev = *h;
        }
    }

    #[test]
    fn replicas_are_deterministic() {
        let m = random_glass(10, 5).unwrap();
        let cfg = AnnealConfig::with_defaults(&m, 5, 5, 0.9, 9).unwrap();
        let model = Arc::new(m.clone());
        let a = run_replicas(&m, &cfg, 8, |_| Ok(ExactEvaluator::new(model.clone()))).unwrap();
        let b = run_replicas(&m, &cfg, 8, |_| Ok(ExactEvaluator::new(model.clone()))).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0].initial_state, a[1].initial_state);
    }
}
