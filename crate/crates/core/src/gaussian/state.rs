use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Block-diagonal symplectic form `⊕ [[0, 1], [-1, 0]]` for `n` modes.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        om[(2 * k, 2 * k + 1)] = 1.0;
        om[(2 * k + 1, 2 * k)] = -1.0;
    }
    om
}

/// Ordered mode labels. Mode `k` owns quadratures `2k` (x) and `2k + 1` (p).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeLayout {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl ModeLayout {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::Layout("layout has no modes".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (k, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), k).is_some() {
                return Err(Error::Layout(format!("duplicate label `{l}`")));
            }
        }
        Ok(Self { labels, index })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_modes(&self) -> usize {
        self.labels.len()
    }

    /// Number of quadratures, `2n`.
    pub fn dim(&self) -> usize {
        2 * self.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    pub fn x(&self, label: &str) -> Result<usize> {
        Ok(2 * self.index_of(label)?)
    }

    pub fn p(&self, label: &str) -> Result<usize> {
        Ok(2 * self.index_of(label)? + 1)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    pub fn omega(&self) -> DMatrix<f64> {
        symplectic_form(self.n_modes())
    }

    /// Quadrature indices of the given modes, in the order given.
    pub fn quadratures<S: AsRef<str>>(&self, modes: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(2 * modes.len());
        for m in modes {
            let k = self.index_of(m.as_ref())?;
            out.push(2 * k);
            out.push(2 * k + 1);
        }
        Ok(out)
    }
}

/// A bipartition of a layout into two nonempty complementary sides.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub side_a: Vec<String>,
    pub side_b: Vec<String>,
}

impl Partition {
    /// Side B is the complement of `side_a`, in layout order.
    pub fn new<S: AsRef<str>>(layout: &ModeLayout, side_a: &[S]) -> Result<Self> {
        let a: Vec<String> = side_a.iter().map(|s| s.as_ref().to_string()).collect();
        let b = layout
            .labels()
            .iter()
            .filter(|l| !a.contains(l))
            .cloned()
            .collect();
        let p = Self { side_a: a, side_b: b };
        p.check(layout)?;
        Ok(p)
    }

    pub fn check(&self, layout: &ModeLayout) -> Result<()> {
        if self.side_a.is_empty() || self.side_b.is_empty() {
            return Err(Error::Partition("both sides must be nonempty".into()));
        }
        let mut seen = vec![false; layout.n_modes()];
        for l in self.side_a.iter().chain(&self.side_b) {
            let k = layout.index_of(l)?;
            if seen[k] {
                return Err(Error::Partition(format!("mode `{l}` appears twice")));
            }
            seen[k] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Partition("sides do not cover every mode".into()));
        }
        Ok(())
    }
}

/// Result of [`GaussianState::validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub max_asymmetry: f64,
    /// Smallest eigenvalue of the Hermitian matrix `Σ + iΩ`.
    pub min_physical_eig: f64,
    /// Smallest symplectic eigenvalue, `NaN` if `Σ` is not positive definite.
    pub min_symplectic: f64,
}

impl Diagnostics {
    pub fn is_physical(&self, tol: f64) -> bool {
        self.min_physical_eig >= -tol && self.min_symplectic >= 1.0 - tol
    }
}

/// First and second moments of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub layout: ModeLayout,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(layout: ModeLayout, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = layout.dim();
        if mean.len() != d || cov.nrows() != d || cov.ncols() != d {
            return Err(Error::Dimension(format!(
                "layout has {d} quadratures, mean {} and covariance {}x{}",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        Ok(Self { layout, mean, cov })
    }

    pub fn vacuum(layout: ModeLayout) -> Self {
        let d = layout.dim();
        Self { layout, mean: DVector::zeros(d), cov: DMatrix::identity(d, d) }
    }

    pub fn n_modes(&self) -> usize {
        self.layout.n_modes()
    }

    pub fn symmetrize(&mut self) {
        symmetrize(&mut self.cov);
    }

    pub fn validate(&self) -> Result<Diagnostics> {
        let d = self.layout.dim();
        if self.mean.len() != d || self.cov.nrows() != d || self.cov.ncols() != d {
            return Err(Error::Dimension("mean and covariance disagree with layout".into()));
        }
        let mut max_asymmetry: f64 = 0.0;
        for i in 0..d {
            for j in 0..i {
                max_asymmetry = max_asymmetry.max((self.cov[(i, j)] - self.cov[(j, i)]).abs());
            }
        }
        let om = self.layout.omega();
        let h = DMatrix::from_fn(d, d, |i, j| {
            let s = 0.5 * (self.cov[(i, j)] + self.cov[(j, i)]);
            Complex64::new(s, om[(i, j)])
        });
        let eig = SymmetricEigen::try_new(h, 1e-14, 0)
            .ok_or_else(|| Error::Eigen("Σ + iΩ did not converge".into()))?;
        let min_physical_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let min_symplectic = match super::symplectic_spectrum(&self.cov) {
            Ok(nu) => nu[0],
            Err(Error::Unphysical(_)) => f64::NAN,
            Err(e) => return Err(e),
        };
        Ok(Diagnostics { max_asymmetry, min_physical_eig, min_symplectic })
    }

    /// Gaussian partial trace onto `keep`, in the order given.
    pub fn reduce<S: AsRef<str>>(&self, keep: &[S]) -> Result<GaussianState> {
        if keep.is_empty() {
            return Err(Error::Partition("cannot reduce onto an empty set".into()));
        }
        let idx = self.layout.quadratures(keep)?;
        let layout = ModeLayout::new(keep.iter().map(|s| s.as_ref().to_string()))?;
        let mean = DVector::from_fn(idx.len(), |i, _| self.mean[idx[i]]);
        let cov = self.cov.select_rows(&idx).select_columns(&idx);
        Ok(GaussianState { layout, mean, cov })
    }
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let d = m.nrows();
    for i in 0..d {
        for j in 0..i {
            let s = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
}
