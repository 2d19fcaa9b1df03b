//! Density-matrix and pure-state engine over finite tensor products of
//! qubits, qudits and Fock-truncated oscillators.

mod lindblad;
mod measures;
mod models;
mod oracle;
mod sme;
mod space;
mod state;

pub use lindblad::{evolve_lindblad, evolve_lindblad_sampled, LindbladConfig};
pub use measures::{
    complement, dense_log_negativity, mutual_information, partial_trace, partial_transpose,
    two_qubit_log_negativity, von_neumann_entropy,
};
pub use models::{
    bell_register_example, monitored_qubits, qubit_register, qudit_chain, truncated_oscillators,
    BellRegisterReport, DenseModel, TruncatedParams,
};
pub use oracle::{dense_moments, oracle_compare, oracle_supports, OracleReport, OracleSample, LEAK_THRESHOLD};
pub use sme::{ensemble_density, sample_sme_ensemble, sample_sme_trajectory, SmeConfig, SmePath, SmeProblem};
pub use space::{
    annihilation, build_operator, truncated_p, truncated_x, DenseOperator, HilbertSpec, OperatorKind,
    Quadrature, DEFAULT_MAX_DIM,
};
pub use state::{DenseState, DensityCheck, DENSITY_TOL};
