//! Scalar diffraction, SLM pattern synthesis and the physical evaluator.

mod fft;
mod geometry;
mod grid;
mod modulation;
mod optimize;
mod propagate;
mod rig;

pub use geometry::{
    beam_geometry, gaussian_radius, layout_intermod_free, layout_spins, waist_placing_focal_length, BeamGeometry, Layout, LayoutPlan,
    OpticalGeometry,
};
pub use grid::{axis, FieldGrid, FieldSidecar};
pub use modulation::{
    ideal_modulation, phase_only_project, Hologram, ModulationOptions, ModulationRole, SlmGrid, Weights,
};
pub use optimize::{optimize_hologram, HologramObjective, OptimizeOutcome, OptimizerOptions};
pub use propagate::{propagate, Propagator};
pub use rig::{
    chain_lenses, compile_rig, physical_evaluate, physical_target, CompiledRig, DetectionMode, PhysicalDetector,
    PhysicalOptical, PhysicalRig, RigConfig,
};
