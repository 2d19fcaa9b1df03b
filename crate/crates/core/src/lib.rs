//! Gaussian and dense-matrix engines for continuously monitored bosonic and
//! qubit systems, together with the measurement-free feedforward protocols
//! that reproduce their conditional entanglement deterministically.
//!
//! Conventions: quadratures are ordered `(x_1, p_1, x_2, p_2, ...)` with
//! `[x, p] = i`, covariance matrices are normalized so that the vacuum is the
//! identity, time is measured in units of the measurement rate and all
//! entropies and negativities are in nats.

pub mod dense;
pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod protocols;

pub use error::{Error, Result};
