//! Ising problems, spectral pretreatment and exact oracles.

mod brute;
mod model;
mod problem;
mod spectral;

pub use brute::{brute_force_ground, brute_force_ground_capped, DEFAULT_BRUTE_FORCE_CAP};
pub use model::{hamiltonian_exact, IsingModel, SpinState};
pub use problem::{mobius_ladder, random_glass, ProblemFile};
pub use spectral::{spectral_transform, EigenSign, SpectralTransform};
