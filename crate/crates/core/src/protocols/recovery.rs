use num_complex::Complex64;

use crate::dynamics::{condition_on_povm, PovmSpec};
use crate::error::{Error, Result};
use crate::gaussian::GaussianState;

/// Conditions every register, in the order given, on outcome `ζ = 0` of a
/// resolution-`μ` momentum measurement and returns the marginal of the
/// remaining modes. Because the conditional covariance does not depend on
/// the outcome, this equals the state after outcome-dependent displacements.
pub fn recover<S: AsRef<str>>(s: &GaussianState, registers: &[S], mu: f64) -> Result<GaussianState> {
    let mut state = s.clone();
    for r in registers {
        let spec = PovmSpec::new(r.as_ref(), mu, Complex64::new(0.0, 0.0))?;
        state = condition_on_povm(&state, &spec)?.0;
    }
    let keep: Vec<&String> = s
        .layout
        .labels()
        .iter()
        .filter(|l| !registers.iter().any(|r| r.as_ref() == l.as_str()))
        .collect();
    if keep.is_empty() {
        return Err(Error::Partition("no system modes left after recovery".into()));
    }
    state.reduce(&keep)
}
