use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{symmetrize_matrix, GaussianState};

/// Gaussian measurement of one mode with kernel covariance
/// `V_μ = diag(1/μ, μ)` in that mode's `(x, p)` ordering, so that `μ → 0`
/// projects onto momentum eigenstates.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmSpec {
    pub target: String,
    pub mu: f64,
    pub outcome: Complex64,
}

impl PovmSpec {
    pub fn new(target: impl Into<String>, mu: f64, outcome: Complex64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::Parameter(format!("POVM resolution μ = {mu} must be positive")));
        }
        Ok(Self { target: target.into(), mu, outcome })
    }
}

/// Conditions `s` on the outcome of `p`.
///
/// The remaining modes get `σ − ε(σ_c + V_μ)⁻¹εᵀ` and mean
/// `r̄ + ε(σ_c + V_μ)⁻¹(r_m − r̄_c)` with `r_m = √2 (Re ζ, Im ζ)`; the target
/// mode is replaced by the displaced kernel state. The returned amplitudes,
/// in layout order with the target's entry equal to `ζ`, are the coherent
/// displacements `(Δx + iΔp)/√2` that map the state conditioned at `ζ = 0`
/// onto the state conditioned at `ζ`.
pub fn condition_on_povm(
    s: &GaussianState,
    p: &PovmSpec,
) -> Result<(GaussianState, Vec<Complex64>)> {
    if !(p.mu > 0.0) {
        return Err(Error::Parameter(format!("POVM resolution μ = {} must be positive", p.mu)));
    }
    let target = s.layout.index_of(&p.target)?;
    let (cx, cp) = (2 * target, 2 * target + 1);
    let dim = s.layout.dim();
    let kernel = Matrix2::new(1.0 / p.mu, 0.0, 0.0, p.mu);
    let sigma_c = Matrix2::new(s.cov[(cx, cx)], s.cov[(cx, cp)], s.cov[(cp, cx)], s.cov[(cp, cp)]);
    let inv = (sigma_c + kernel)
        .try_inverse()
        .ok_or_else(|| Error::Unphysical("σ_c + V_μ is singular".into()))?;
    let rm = Vector2::new(p.outcome.re, p.outcome.im) * 2f64.sqrt();
    let innov = rm - Vector2::new(s.mean[cx], s.mean[cp]);
    // ε: every quadrature row against the target's two columns.
    let eps = DMatrix::from_fn(dim, 2, |i, j| s.cov[(i, if j == 0 { cx } else { cp })]);
    let inv_d = DMatrix::from_column_slice(2, 2, inv.as_slice());
    let gain = &eps * &inv_d;
    let mut cov = &s.cov - &gain * eps.transpose();
    let shift = &gain * DVector::from_column_slice(rm.as_slice());
    let mut mean = &s.mean + &gain * DVector::from_column_slice(innov.as_slice());
    for i in [cx, cp] {
        for j in 0..dim {
            cov[(i, j)] = 0.0;
            cov[(j, i)] = 0.0;
        }
    }
    cov[(cx, cx)] = kernel[(0, 0)];
    cov[(cp, cp)] = kernel[(1, 1)];
    mean[cx] = rm[0];
    mean[cp] = rm[1];
    symmetrize_matrix(&mut cov);
    let amps = (0..s.n_modes())
        .map(|k| {
            if k == target {
                p.outcome
            } else {
                Complex64::new(shift[2 * k], shift[2 * k + 1]) / 2f64.sqrt()
            }
        })
        .collect();
    Ok((GaussianState { layout: s.layout.clone(), mean, cov }, amps))
}
