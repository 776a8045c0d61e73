//! Optical evaluation tiers, detector noise, fidelity and budget metrics.

mod budget;
mod detector;
mod evaluator;
mod metrics;

pub use budget::{noise_budget, perf_report, NoiseReport, PerfModel, PerfReport, ELEMENTARY_CHARGE};
pub use detector::{detect, CameraConfig, Detection, DetectorModel};
pub use evaluator::{
    exposure_for_dominant_beam, exposure_for_ground_hamiltonian, exposure_unsaturated, hamiltonian_from_intensities,
    hamiltonian_from_readings, noisy_hamiltonian, ovmm_ideal, Evaluation, ExactEvaluator,
    HamiltonianEvaluator, IdealOptical, NoisyOptical,
};
pub use metrics::{fidelity_matrix, fidelity_vector, normalization_coefficient};
