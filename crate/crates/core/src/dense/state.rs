use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::space::HilbertSpec;
use crate::error::{Error, Result};

/// Trace, Hermiticity and eigenvalue tolerance for density matrices.
pub const DENSITY_TOL: f64 = 1e-8;

/// A pure amplitude vector or a density matrix over a tensor-product space.
#[derive(Debug, Clone)]
pub enum DenseState {
    Pure { dims: Vec<usize>, psi: DVector<Complex64> },
    Mixed { dims: Vec<usize>, rho: DMatrix<Complex64> },
}

/// Validation summary of a density matrix.
#[derive(Debug, Clone, Copy)]
pub struct DensityCheck {
    pub trace_error: f64,
    pub max_anti_hermitian: f64,
    pub min_eigenvalue: f64,
}

impl DensityCheck {
    pub fn is_valid(&self, tol: f64) -> bool {
        self.trace_error <= tol && self.max_anti_hermitian <= tol && self.min_eigenvalue >= -tol
    }
}

impl DenseState {
    pub fn pure(spec: &HilbertSpec, psi: DVector<Complex64>) -> Result<Self> {
        if psi.len() != spec.dim() {
            return Err(Error::Dimension(format!(
                "amplitude vector has length {}, space has dimension {}",
                psi.len(),
                spec.dim()
            )));
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > DENSITY_TOL {
            return Err(Error::Unphysical(format!("state norm {norm}")));
        }
        Ok(DenseState::Pure { dims: spec.dims().to_vec(), psi })
    }

    pub fn mixed(spec: &HilbertSpec, rho: DMatrix<Complex64>) -> Result<Self> {
        let n = spec.dim();
        if rho.nrows() != n || rho.ncols() != n {
            return Err(Error::Dimension(format!(
                "density matrix is {}x{}, space has dimension {n}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let s = DenseState::Mixed { dims: spec.dims().to_vec(), rho };
        let check = s.check()?;
        if !check.is_valid(DENSITY_TOL) {
            return Err(Error::Unphysical(format!("invalid density matrix: {check:?}")));
        }
        Ok(s)
    }

    /// Product of computational basis states, one level per subsystem.
    pub fn basis_product(spec: &HilbertSpec, levels: &[usize]) -> Result<Self> {
        if levels.len() != spec.n_subsystems() {
            return Err(Error::Dimension(format!(
                "{} levels for {} subsystems",
                levels.len(),
                spec.n_subsystems()
            )));
        }
        let mut index = 0;
        for (&l, &d) in levels.iter().zip(spec.dims()) {
            if l >= d {
                return Err(Error::Parameter(format!("level {l} outside dimension {d}")));
            }
            index = index * d + l;
        }
        let mut psi = DVector::zeros(spec.dim());
        psi[index] = Complex64::from(1.0);
        Self::pure(spec, psi)
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            DenseState::Pure { dims, .. } | DenseState::Mixed { dims, .. } => dims,
        }
    }

    pub fn dim(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn density(&self) -> DMatrix<Complex64> {
        match self {
            DenseState::Pure { psi, .. } => psi * psi.adjoint(),
            DenseState::Mixed { rho, .. } => rho.clone(),
        }
    }

    pub fn into_density(self) -> DMatrix<Complex64> {
        match self {
            DenseState::Pure { psi, .. } => &psi * psi.adjoint(),
            DenseState::Mixed { rho, .. } => rho,
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            DenseState::Pure { psi, .. } => psi.norm_squared(),
            DenseState::Mixed { rho, .. } => rho.trace().re,
        }
    }

    pub fn purity(&self) -> f64 {
        match self {
            DenseState::Pure { psi, .. } => psi.norm_squared().powi(2),
            DenseState::Mixed { rho, .. } => rho.iter().map(|v| v.norm_sqr()).sum(),
        }
    }

    /// Trace error, Hermiticity and smallest eigenvalue.
    pub fn check(&self) -> Result<DensityCheck> {
        let rho = self.density();
        let herm = (&rho - rho.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        let sym = (&rho + rho.adjoint()) * Complex64::from(0.5);
        let min = sym
            .try_symmetric_eigen(1e-14, 0)
            .ok_or_else(|| Error::Eigen("density matrix eigendecomposition".into()))?
            .eigenvalues
            .min();
        Ok(DensityCheck {
            trace_error: (rho.trace().re - 1.0).abs(),
            max_anti_hermitian: herm,
            min_eigenvalue: min,
        })
    }

    /// Population of each subsystem's highest level.
    pub fn top_level_populations(&self) -> Vec<f64> {
        let dims = self.dims().to_vec();
        let diag: Vec<f64> = match self {
            DenseState::Pure { psi, .. } => psi.iter().map(|v| v.norm_sqr()).collect(),
            DenseState::Mixed { rho, .. } => rho.diagonal().iter().map(|v| v.re).collect(),
        };
        let mut out = vec![0.0; dims.len()];
        for (i, p) in diag.iter().enumerate() {
            let digits = super::measures::digits(i, &dims);
            for (k, (&l, &d)) in digits.iter().zip(&dims).enumerate() {
                if l == d - 1 {
                    out[k] += p;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_product_index() {
        let spec = HilbertSpec::new(vec![2, 2, 3]).unwrap();
        let s = DenseState::basis_product(&spec, &[1, 1, 0]).unwrap();
        match &s {
            DenseState::Pure { psi, .. } => assert_eq!(psi[9].re, 1.0),
            _ => unreachable!(),
        }
        let c = s.check().unwrap();
        assert!(c.is_valid(1e-12));
        assert!((s.purity() - 1.0).abs() < 1e-15);
        assert_eq!(s.top_level_populations(), vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn rejects_invalid() {
        let spec = HilbertSpec::new(vec![2]).unwrap();
        let psi = DVector::from_element(2, Complex64::from(1.0));
        assert!(DenseState::pure(&spec, psi).is_err());
        let mut rho = DMatrix::zeros(2, 2);
        rho[(0, 0)] = Complex64::from(1.2);
        rho[(1, 1)] = Complex64::from(-0.2);
        assert!(DenseState::mixed(&spec, rho).is_err());
    }
}
