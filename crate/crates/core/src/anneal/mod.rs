//! Modified simulated annealing with Cauchy-distributed multi-spin flips.

mod config;
mod engine;
mod sampling;
mod stats;
mod trace;

pub use config::{default_alpha, default_t0, AnnealConfig};
pub use engine::{anneal, anneal_with_rng, run_replicas, run_rng, AnnealResult, StepRecord};
pub use sampling::{metropolis_accept, sample_flip_count, sample_flip_count_counted};
pub use stats::{ground_state_probability, is_ground, reference_minimum};
pub use trace::{write_probability_csv, write_trace_csv, TRACE_SCHEMA_VERSION};
