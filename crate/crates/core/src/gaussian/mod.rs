//! Gaussian states, symplectic algebra and entanglement measures.

mod measures;
mod state;

pub use measures::{
    eof_symmetric_two_mode, entanglement_entropy, entanglement_report, log_negativity,
    normal_ordered_correlators, pairing_correlators, partial_transpose, purity,
    symplectic_spectrum, two_mode_entropy, Entropy, EntanglementReport,
};
pub(crate) use state::symmetrize as symmetrize_matrix;
pub use state::{symplectic_form, Diagnostics, GaussianState, ModeLayout, Partition};

/// Tolerance for the physicality checks on `Σ + iΩ` and symplectic eigenvalues.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Purity threshold above which a global state counts as pure.
pub const PURE_TOL: f64 = 1e-6;
