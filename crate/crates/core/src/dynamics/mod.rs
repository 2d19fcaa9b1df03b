//! Generator assembly and integrators for Gaussian dynamics: unconditional
//! Lyapunov evolution, conditional Riccati evolution, stochastic means and
//! Gaussian POVM conditioning.

mod generators;
mod integrate;
mod povm;
mod trajectory;

pub use generators::{
    assemble_generators, GeneratorSet, LinearJump, MonitoredQuadrature, QuadraticHamiltonian,
};
pub use integrate::{
    evolve_conditional, evolve_unconditional, run_schedule, EvolutionMode, IntegratorConfig,
    Schedule, Segment, Snapshot,
};
pub use povm::{condition_on_povm, PovmSpec};
pub use trajectory::{sample_ensemble, sample_trajectory, Trajectory};
