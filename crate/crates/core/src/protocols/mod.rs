//! Scenario builders for the monitored, feedforward, dissipative and
//! reservoir-engineered setups, plus recovery, lattice analysis and sweep
//! metrics.

mod lattice;
mod metrics;
mod params;
mod recovery;
mod two_mode;

pub use lattice::{
    bond_spectrum, build_lattice_scenario, page_curve, BondSpectrum, LatticeScenario,
    MAX_QUADRATURES,
};
pub use metrics::{
    inefficiency_metrics, log_slope, stabilization_time, stopping_time, InefficiencyReport,
    STOP_CAP, STOP_THRESHOLD, STOP_WINDOW,
};
pub use params::{ScenarioParams, Variant};
pub use recovery::recover;
pub use two_mode::{build_two_mode_scenario, conditional_law, Scenario};

use rayon::prelude::*;

/// Evaluates `f` on every sweep value in parallel, keeping input order.
pub fn sweep<T, R, F>(values: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    values.par_iter().map(f).collect()
}
