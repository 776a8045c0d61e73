//! Python bindings. Matrices travel as lists of rows, spin states as lists of ±1.

use std::sync::Arc;

use photonic_ising::anneal::{default_t0, ground_state_probability, reference_minimum, run_replicas, AnnealConfig};
use photonic_ising::ising::{self, IsingModel, SpinState, DEFAULT_BRUTE_FORCE_CAP};
use photonic_ising::optics::{exposure_unsaturated, noise_budget, DetectorModel, ExactEvaluator, IdealOptical, NoisyOptical};
use pyo3::exceptions::{PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: photonic_ising::Error) -> PyErr {
    match e {
        photonic_ising::Error::Capacity { .. } => PyOverflowError::new_err(e.to_string()),
        photonic_ising::Error::Numerical(_) | photonic_ising::Error::UndefinedFidelity(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn model(j: Vec<Vec<f64>>) -> PyResult<IsingModel> {
    IsingModel::from_rows(&j).map_err(err)
}

fn state(s: Vec<i8>) -> PyResult<SpinState> {
    SpinState::new(s).map_err(err)
}

/// Couplings of a Möbius ladder with `n` spins.
#[pyfunction]
fn mobius_ladder(n: usize) -> PyResult<Vec<Vec<f64>>> {
    Ok(ising::mobius_ladder(n).map_err(err)?.to_rows())
}

/// Couplings of a dense ±1 glass.
#[pyfunction]
fn random_glass(n: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    Ok(ising::random_glass(n, seed).map_err(err)?.to_rows())
}

/// `H = −½ σᵀJσ`.
#[pyfunction]
fn hamiltonian(j: Vec<Vec<f64>>, spins: Vec<i8>) -> PyResult<f64> {
    ising::hamiltonian_exact(&model(j)?, &state(spins)?).map_err(err)
}

/// Ground state and energy by enumeration (n ≤ 24).
#[pyfunction]
fn brute_force_ground(py: Python<'_>, j: Vec<Vec<f64>>) -> PyResult<(Vec<i8>, f64)> {
    let m = model(j)?;
    let (s, h) = py.detach(|| ising::brute_force_ground(&m)).map_err(err)?;
    Ok((s.spins().to_vec(), h))
}

#[pyclass(get_all, frozen)]
struct Transform {
    /// Real and imaginary parts of `A`, rows indexed by eigenvalue.
    a_real: Vec<Vec<f64>>,
    a_imag: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    /// True for rows carrying a negative eigenvalue.
    negative: Vec<bool>,
}

/// Complex transform `A` with `AᵀA = J`.
#[pyfunction]
fn spectral_transform(j: Vec<Vec<f64>>) -> PyResult<Transform> {
    let t = ising::spectral_transform(&model(j)?, None).map_err(err)?;
    let a = t.a();
    let rows = |f: fn(&photonic_ising::Complex64) -> f64| (0..a.nrows()).map(|r| (0..a.ncols()).map(|c| f(&a[(r, c)])).collect()).collect();
    Ok(Transform {
        a_real: rows(|v| v.re),
        a_imag: rows(|v| v.im),
        eigenvalues: t.eigenvalues().to_vec(),
        negative: t.sign_mask().iter().map(|s| *s == ising::EigenSign::Negative).collect(),
    })
}

#[pyclass(get_all, frozen)]
struct Solution {
    best_h: f64,
    best_state: Vec<i8>,
    reference_h: f64,
    /// True when the reference comes from enumeration.
    reference_exact: bool,
    /// Ground-state probability after each iteration.
    probability: Vec<f64>,
    /// Initial temperature in the tier's Hamiltonian units.
    t0: f64,
    exposure: f64,
}

/// Replicated annealing on the `exact`, `ideal` or `noisy` tier.
///
/// `t0` is in model units; when absent, `t0_factor` times the random-probe default.
#[pyfunction]
#[pyo3(signature = (j, n_step, n_temp, eta, runs, seed, tier = "exact", t0 = None, t0_factor = 1.0, reference_runs = 200))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    j: Vec<Vec<f64>>,
    n_step: usize,
    n_temp: usize,
    eta: f64,
    runs: usize,
    seed: u64,
    tier: &str,
    t0: Option<f64>,
    t0_factor: f64,
    reference_runs: usize,
) -> PyResult<Solution> {
    let m = model(j)?;
    let tier = tier.to_owned();
    py.detach(move || solve_inner(&m, n_step, n_temp, eta, runs, seed, &tier, t0, t0_factor, reference_runs)).map_err(err)
}

#[allow(clippy::too_many_arguments)]
fn solve_inner(
    m: &IsingModel,
    n_step: usize,
    n_temp: usize,
    eta: f64,
    runs: usize,
    seed: u64,
    tier: &str,
    t0: Option<f64>,
    t0_factor: f64,
    reference_runs: usize,
) -> photonic_ising::Result<Solution> {
    let n = m.n();
    let t0 = match t0 {
        Some(t) => t,
        None => t0_factor * default_t0(m, seed)?,
    };
    let model_cfg = AnnealConfig::with_t0(n, t0, n_step, n_temp, eta, seed)?;
    let (results, cfg, exposure) = match tier {
        "exact" => {
            let shared = Arc::new(m.clone());
            (run_replicas(m, &model_cfg, runs, |_| Ok(ExactEvaluator::new(shared.clone())))?, model_cfg.clone(), 1.0)
        }
        "ideal" => {
            let t = Arc::new(ising::spectral_transform(m, None)?);
            (run_replicas(m, &model_cfg, runs, |_| Ok(IdealOptical::new(t.clone())))?, model_cfg.clone(), 1.0)
        }
        "noisy" => {
            let t = Arc::new(ising::spectral_transform(m, None)?);
            let det = DetectorModel::scmos_default();
            let c = exposure_unsaturated(&t, &det)?;
            let cfg = AnnealConfig::with_t0(n, t0 * c, n_step, n_temp, eta, seed)?;
            let results = run_replicas(m, &cfg, runs, |r| {
                Ok(NoisyOptical::seeded(t.clone(), det.clone(), c, seed ^ ((r as u64) << 32)))
            })?;
            (results, cfg, c)
        }
        other => return Err(photonic_ising::Error::Config(format!("unknown tier {other:?}"))),
    };
    let mut ref_cfg = model_cfg;
    ref_cfg.seed ^= 0x200;
    let (_, reference_h, reference_exact) = reference_minimum(m, &ref_cfg, reference_runs, DEFAULT_BRUTE_FORCE_CAP)?;
    let probability = ground_state_probability(&results, reference_h, m)?;
    let (best_h, best_state) = results
        .iter()
        .flat_map(|r| std::iter::once((r.initial_exact_h, &r.initial_state)).chain(r.accepted_exact_h.iter().copied().zip(&r.accepted_spins)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(h, s)| (h, s.spins().to_vec()))
        .unwrap_or((f64::NAN, Vec::new()));
    Ok(Solution { best_h, best_state, reference_h, reference_exact, probability, t0: cfg.t0, exposure })
}

/// Ground-state noise budget of the default camera as a dict.
#[pyfunction]
#[pyo3(signature = (n, h0, h_min, delta_h_min))]
fn noise_report<'py>(py: Python<'py>, n: usize, h0: f64, h_min: f64, delta_h_min: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = noise_budget(&DetectorModel::scmos_default(), n, h0, h_min, delta_h_min).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("n", r.n)?;
    d.set_item("delta_h", r.delta_h)?;
    d.set_item("delta_h_averaged", r.delta_h_averaged)?;
    d.set_item("snr_db", r.snr_db)?;
    d.set_item("resolution", r.resolution)?;
    d.set_item("relative_interval", r.relative_interval)?;
    d.set_item("resolvable", r.resolvable)?;
    Ok(d)
}

#[pymodule]
fn pyphotonic(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Transform>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(mobius_ladder, m)?)?;
    m.add_function(wrap_pyfunction!(random_glass, m)?)?;
    m.add_function(wrap_pyfunction!(hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_ground, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_transform, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(noise_report, m)?)?;
    Ok(())
}
