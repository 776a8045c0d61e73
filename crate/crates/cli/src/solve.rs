use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use photonic_ising::anneal::{
    default_alpha, default_t0, ground_state_probability, reference_minimum, run_replicas, write_probability_csv,
    write_trace_csv, AnnealConfig, AnnealResult,
};
use photonic_ising::holography::{compile_rig, CompiledRig, PhysicalDetector, PhysicalOptical, RigConfig};
use photonic_ising::ising::{spectral_transform, IsingModel, SpinState, DEFAULT_BRUTE_FORCE_CAP};
use photonic_ising::optics::{
    exposure_for_dominant_beam, exposure_unsaturated, normalization_coefficient, DetectorModel, ExactEvaluator,
    IdealOptical, NoisyOptical,
};
use serde::Serialize;

use crate::artifact::{create, ensure_dir, stamped_json, write_file, Stamp};
use crate::error::{CliError, CliResult};
use crate::manifest::{Exposure, ExposureRule, LoadedManifest, PhysicalSettings, RunManifest, Tier};

#[derive(Debug, Serialize)]
pub struct Summary {
    pub tier: Tier,
    pub n: usize,
    pub runs: usize,
    pub iterations: usize,
    pub t0: f64,
    pub alpha: f64,
    pub eta: f64,
    /// Electrons per unit intensity; 1 for tiers without a camera.
    pub exposure: f64,
    pub reference_h: f64,
    pub reference_method: &'static str,
    /// Spins as `+`/`-` characters.
    pub reference_state: String,
    pub best_h: f64,
    pub best_state: String,
    pub final_probability: f64,
    /// Evaluator-to-exact Hamiltonian ratio over accepted states with nonzero exact `H`.
    pub k_mean: f64,
    pub k_std: f64,
    pub evaluations: usize,
    pub saturation_free_exposure: bool,
    pub wall_clock_seconds: f64,
}

pub struct SolveOutput {
    pub dir: PathBuf,
    pub summary: Summary,
}

/// Runs the manifest; `out_override` replaces the manifest's output directory.
pub fn solve(loaded: &LoadedManifest, out_override: Option<&Path>) -> CliResult<SolveOutput> {
    let m = &loaded.manifest;
    let start = Instant::now();
    let model = m.problem.load(&loaded.base)?;
    let n = model.n();
    let stamp = Stamp::of_bytes(&loaded.bytes, m.seed);
    let dir = match out_override {
        Some(d) => d.to_path_buf(),
        None if m.output.is_absolute() => m.output.clone(),
        None => loaded.base.join(&m.output),
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(m.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::config(format!("cannot start worker pool: {e}")))?;
    let (results, cfg, exposure, unsaturated) = pool.install(|| run_tier(m, &model))?;

    // the reference schedule reuses the model-unit temperature of the scored runs
    let mut ref_cfg = cfg.clone();
    ref_cfg.t0 /= exposure;
    ref_cfg.alpha = default_alpha(n, ref_cfg.t0);
    ref_cfg.seed = m.seed ^ 0x5EED_0000_0000_0000;
    let (ref_state, ref_h, brute) = pool.install(|| reference_minimum(&model, &ref_cfg, m.reference_runs, DEFAULT_BRUTE_FORCE_CAP))?;
    let curve = ground_state_probability(&results, ref_h, &model)?;

    let (k_mean, k_std) = k_statistics(&results)?;
    // evaluator readings may be noisy, so the best state is chosen by its exact Hamiltonian
    let (best_h, best_state) = results
        .iter()
        .flat_map(|r| {
            std::iter::once((r.initial_exact_h, &r.initial_state)).chain(r.accepted_exact_h.iter().copied().zip(&r.accepted_spins))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("runs >= 1");
    ensure_dir(&dir)?;
    let header = stamp.csv_header();
    write_trace_csv(create(&dir.join("traces.csv"))?, &header, &results)?;
    write_probability_csv(create(&dir.join("probability.csv"))?, &header, &curve)?;
    let summary = Summary {
        tier: m.tier,
        n,
        runs: m.runs,
        iterations: cfg.iterations(),
        t0: cfg.t0,
        alpha: cfg.alpha,
        eta: cfg.eta,
        exposure,
        reference_h: ref_h,
        reference_method: if brute { "brute-force" } else { "best-of-exact-runs" },
        reference_state: spins(&ref_state),
        best_h,
        best_state: spins(best_state),
        final_probability: *curve.last().unwrap_or(&0.0),
        k_mean,
        k_std,
        evaluations: results.iter().map(|r| r.evaluations).sum(),
        saturation_free_exposure: unsaturated,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    write_file(&dir.join("summary.json"), stamped_json(&stamp, &summary)?.as_bytes())?;
    Ok(SolveOutput { dir, summary })
}

type TierRun = (Vec<AnnealResult>, AnnealConfig, f64, bool);

fn run_tier(m: &RunManifest, model: &IsingModel) -> CliResult<TierRun> {
    let n = model.n();
    let t0_model = match (m.anneal.t0, m.anneal.t0_factor) {
        (Some(t0), _) => t0,
        (None, f) => f.unwrap_or(1.0) * default_t0(model, m.seed)?,
    };
    let shared = Arc::new(model.clone());
    let schedule = |exposure: f64| -> CliResult<AnnealConfig> {
        let t0 = t0_model * exposure;
        let mut cfg = AnnealConfig::with_t0(n, t0, m.anneal.n_step, m.anneal.n_temp, m.anneal.eta, m.seed)?;
        if let Some(a) = m.anneal.alpha {
            // alpha is given per model unit of temperature
            cfg.alpha = a / exposure;
            cfg.validate()?;
        }
        Ok(cfg)
    };
    match m.tier {
        Tier::Exact => {
            let cfg = schedule(1.0)?;
            let r = run_replicas(model, &cfg, m.runs, |_| Ok(ExactEvaluator::new(shared.clone())))?;
            Ok((r, cfg, 1.0, true))
        }
        Tier::Ideal => {
            let t = Arc::new(spectral_transform(model, None)?);
            let cfg = schedule(1.0)?;
            let r = run_replicas(model, &cfg, m.runs, |_| Ok(IdealOptical::new(t.clone())))?;
            Ok((r, cfg, 1.0, true))
        }
        Tier::Noisy => {
            let t = Arc::new(spectral_transform(model, None)?);
            let det = match &m.camera {
                Some(c) => DetectorModel::new(c.clone())?,
                None => DetectorModel::scmos_default(),
            };
            let safe = exposure_unsaturated(&t, &det)?;
            let exposure = match m.exposure {
                Exposure::Fixed(c) => c,
                Exposure::Rule(ExposureRule::Unsaturated) => safe,
                Exposure::Rule(ExposureRule::DominantGround) => {
                    let (g, _) = photonic_ising::ising::brute_force_ground(model)?;
                    exposure_for_dominant_beam(&t, &g, &det)?
                }
            };
            let cfg = schedule(exposure)?;
            let seed = m.seed;
            let r = run_replicas(model, &cfg, m.runs, |run| {
                Ok(NoisyOptical::seeded(t.clone(), det.clone(), exposure, evaluator_seed(seed, run)))
            })?;
            Ok((r, cfg, exposure, exposure <= safe * (1.0 + 1e-12)))
        }
        Tier::Physical => {
            let rig = Arc::new(compile_physical(m, model)?);
            let detector = match (&m.camera, &m.exposure) {
                (Some(c), Exposure::Fixed(x)) => Some(PhysicalDetector { model: DetectorModel::new(c.clone())?, exposure_scale: *x }),
                _ => None,
            };
            let cfg = schedule(1.0)?;
            let seed = m.seed;
            let r = run_replicas(model, &cfg, m.runs, |run| {
                Ok(PhysicalOptical::new(rig.clone(), detector.clone(), evaluator_seed(seed, run)))
            })?;
            Ok((r, cfg, 1.0, detector.is_none()))
        }
    }
}

fn compile_physical(m: &RunManifest, model: &IsingModel) -> CliResult<CompiledRig> {
    let settings = m.physical.clone().unwrap_or_default();
    let PhysicalSettings { rig, calibration } = settings;
    let config = match rig {
        Some(c) => c,
        None => RigConfig::toy(model.n())?,
    };
    let t = spectral_transform(model, None)?;
    Ok(compile_rig(config, &t, &calibration)?.0)
}

fn evaluator_seed(seed: u64, run: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(run as u64)
}

fn k_statistics(results: &[AnnealResult]) -> CliResult<(f64, f64)> {
    let (exp, theo): (Vec<f64>, Vec<f64>) = results
        .iter()
        .flat_map(|r| r.accepted_h.iter().zip(&r.accepted_exact_h))
        .map(|(a, b)| (*a, *b))
        .unzip();
    match normalization_coefficient(&exp, &theo) {
        Ok(k) => Ok(k),
        // every accepted state had H = 0; the ratio is undefined
        Err(_) if theo.iter().all(|h| *h == 0.0) => Ok((f64::NAN, f64::NAN)),
        Err(e) => Err(e.into()),
    }
}

pub fn spins(s: &SpinState) -> String {
    s.spins().iter().map(|v| if *v > 0 { '+' } else { '-' }).collect()
}
