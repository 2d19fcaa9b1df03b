use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::symplectic_form;

/// `H = ½ rᵀ G r + fᵀ r`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    pub g: DMatrix<f64>,
    pub f: DVector<f64>,
}

impl QuadraticHamiltonian {
    pub fn zero(dim: usize) -> Self {
        Self { g: DMatrix::zeros(dim, dim), f: DVector::zeros(dim) }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// Adds `coeff · (u·r)(w·r)`, symmetrized.
    pub fn add_coupling(&mut self, u: &DVector<f64>, w: &DVector<f64>, coeff: f64) {
        self.g += (u * w.transpose() + w * u.transpose()) * coeff;
    }

    /// Adds `(ω/2)(x² + p²)` on the mode whose x quadrature has index `x`.
    pub fn add_mode_frequency(&mut self, x: usize, omega: f64) {
        self.g[(x, x)] += omega;
        self.g[(x + 1, x + 1)] += omega;
    }
}

/// Jump operator `L = cᵀ r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearJump {
    pub c: DVector<Complex64>,
}

impl LinearJump {
    pub fn new(c: DVector<Complex64>) -> Result<Self> {
        if c.iter().all(|z| z.norm() == 0.0) {
            return Err(Error::Parameter("jump operator has zero coefficients".into()));
        }
        Ok(Self { c })
    }

    /// Hermitian jump `sqrt(rate) · v·r`.
    pub fn hermitian(v: &DVector<f64>, rate: f64) -> Result<Self> {
        Self::new(v.map(|x| Complex64::new(x * rate.sqrt(), 0.0)))
    }

    /// `u·r + i w·r`, each direction given as a real vector.
    pub fn complex(re: &DVector<f64>, im: &DVector<f64>) -> Result<Self> {
        Self::new(re.zip_map(im, Complex64::new))
    }
}

/// Continuous homodyne-type measurement of `v·r` at rate `rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitoredQuadrature {
    pub v: DVector<f64>,
    pub rate: f64,
}

impl MonitoredQuadrature {
    /// Normalizes `v`.
    pub fn new(v: DVector<f64>, rate: f64) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Parameter("monitored direction must be nonzero".into()));
        }
        if !(rate >= 0.0) {
            return Err(Error::Parameter(format!("monitor rate {rate} must be nonnegative")));
        }
        Ok(Self { v: v / n, rate })
    }
}

/// Nonzero entries of each row of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SparseRows {
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter(|&j| m[(i, j)] != 0.0)
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        Self { rows }
    }

    #[cfg(test)]
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `out = self · m`.
    pub fn mul_into(&self, m: &DMatrix<f64>, out: &mut DMatrix<f64>) {
        let (r, n) = (m.nrows(), m.ncols());
        let (ms, os) = (m.as_slice(), out.as_mut_slice());
        for j in 0..n {
            let col = &ms[j * r..(j + 1) * r];
            let dst = &mut os[j * r..(j + 1) * r];
            for (o, row) in dst.iter_mut().zip(&self.rows) {
                *o = row.iter().map(|&(k, a)| a * col[k]).sum();
            }
        }
    }

    pub fn mul_vec_into(&self, v: &DVector<f64>, out: &mut DVector<f64>) {
        for (i, row) in self.rows.iter().enumerate() {
            out[i] = row.iter().map(|&(k, a)| a * v[k]).sum();
        }
    }
}

/// Compiled drift, diffusion and monitor data for one constant segment.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    pub a: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub drive: DVector<f64>,
    pub monitors: Vec<MonitoredQuadrature>,
    pub(crate) a_sparse: SparseRows,
}

impl GeneratorSet {
    pub fn zero(dim: usize) -> Self {
        let a = DMatrix::zeros(dim, dim);
        let a_sparse = SparseRows::from_dense(&a);
        Self { a, d: DMatrix::zeros(dim, dim), drive: DVector::zeros(dim), monitors: vec![], a_sparse }
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Same generators with the monitors removed.
    pub fn without_monitors(&self) -> Self {
        Self { monitors: vec![], ..self.clone() }
    }
}

/// Compiles a quadratic Hamiltonian, linear jumps and monitored quadratures
/// into `dr = (A r + Ω f) dt`, `dΣ = (AΣ + ΣAᵀ + D) dt`:
/// `A = Ω(G + Σ Im(c̄cᵀ))`, `D = 2Ω(Σ Re(c̄cᵀ) + Σ γ v vᵀ)Ωᵀ`.
pub fn assemble_generators(
    h: &QuadraticHamiltonian,
    jumps: &[LinearJump],
    monitors: &[MonitoredQuadrature],
) -> Result<GeneratorSet> {
    let dim = h.dim();
    if dim == 0 || dim % 2 != 0 || h.g.ncols() != dim || h.f.len() != dim {
        return Err(Error::Dimension(format!("Hamiltonian of size {dim} is not a phase space")));
    }
    let mut re = DMatrix::zeros(dim, dim);
    let mut im = DMatrix::zeros(dim, dim);
    for j in jumps {
        if j.c.len() != dim {
            return Err(Error::Dimension(format!("jump of length {} in dimension {dim}", j.c.len())));
        }
        for r in 0..dim {
            for s in 0..dim {
                let z = j.c[r].conj() * j.c[s];
                re[(r, s)] += z.re;
                im[(r, s)] += z.im;
            }
        }
    }
    let om = symplectic_form(dim / 2);
    for (k, m) in monitors.iter().enumerate() {
        if m.v.len() != dim {
            return Err(Error::Dimension(format!("monitor of length {} in dimension {dim}", m.v.len())));
        }
        for (l, other) in monitors.iter().enumerate().take(k) {
            if (m.v.transpose() * &om * &other.v)[0].abs() > 1e-12 {
                return Err(Error::NonCommutingMonitors(l, k));
            }
        }
        re += &m.v * m.v.transpose() * m.rate;
    }
    let g_sym = (&h.g + h.g.transpose()) * 0.5;
    let a = &om * (g_sym + im);
    let mut d = &om * re * om.transpose() * 2.0;
    crate::gaussian::symmetrize_matrix(&mut d);
    let drive = &om * &h.f;
    let a_sparse = SparseRows::from_dense(&a);
    Ok(GeneratorSet { a, d, drive, monitors: monitors.to_vec(), a_sparse })
}
