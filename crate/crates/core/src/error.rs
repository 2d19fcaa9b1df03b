use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid mode layout: {0}")]
    Layout(String),
    #[error("unknown mode label `{0}`")]
    UnknownMode(String),
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("unphysical state: {0}")]
    Unphysical(String),
    #[error("unsupported state: {0}")]
    Unsupported(String),
    #[error("monitors {0} and {1} do not commute")]
    NonCommutingMonitors(usize, usize),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("physicality violated at t = {t}: {detail}")]
    PhysicsViolation { t: f64, detail: String },
    #[error("trace drifted by {drift:e} in one step")]
    TraceDrift { drift: f64 },
    #[error("state norm collapsed during trajectory")]
    NormCollapse,
    #[error("Hilbert space dimension {dim} exceeds limit {max}")]
    DimensionOverflow { dim: usize, max: usize },
    #[error("mismatched series: {0}")]
    Series(String),
}

pub type Result<T> = std::result::Result<T, Error>;
