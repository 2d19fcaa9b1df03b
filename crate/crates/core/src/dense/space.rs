use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default bound on the total Hilbert-space dimension.
pub const DEFAULT_MAX_DIM: usize = 4096;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const CI: Complex64 = Complex64::new(0.0, 1.0);

/// Ordered subsystem dimensions of a tensor-product space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpec {
    dims: Vec<usize>,
}

impl HilbertSpec {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        Self::with_max_dim(dims, DEFAULT_MAX_DIM)
    }

    pub fn with_max_dim(dims: Vec<usize>, max_dim: usize) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Dimension("no subsystems".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::Dimension(format!("subsystem dimension {d} < 2")));
        }
        let mut dim = 1usize;
        for &d in &dims {
            dim = dim.saturating_mul(d);
        }
        if dim > max_dim {
            return Err(Error::DimensionOverflow { dim, max: max_dim });
        }
        Ok(HilbertSpec { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn n_subsystems(&self) -> usize {
        self.dims.len()
    }
}

/// Quadrature selector for same-site products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    P,
}

/// Operator recipes understood by [`build_operator`]. Site indices are
/// zero-based positions in the [`HilbertSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    PauliX(usize),
    PauliY(usize),
    PauliZ(usize),
    /// `(a + a†)/√2` on the kept Fock levels.
    TruncatedX(usize),
    /// `−i(a − a†)/√2` on the kept Fock levels.
    TruncatedP(usize),
    Annihilation(usize),
    /// Product of two quadratures of one site, formed before truncation and
    /// then restricted. Exact for states supported on the kept levels.
    QuadratureProduct(usize, Quadrature, Quadrature),
    /// Projector onto the highest kept level of a site.
    TopLevel(usize),
    Identity,
    Sum(Vec<(Complex64, OperatorKind)>),
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::PauliX(k) => write!(f, "pauli_x:{k}"),
            OperatorKind::PauliY(k) => write!(f, "pauli_y:{k}"),
            OperatorKind::PauliZ(k) => write!(f, "pauli_z:{k}"),
            OperatorKind::TruncatedX(k) => write!(f, "truncated_x:{k}"),
            OperatorKind::TruncatedP(k) => write!(f, "truncated_p:{k}"),
            OperatorKind::Annihilation(k) => write!(f, "annihilation:{k}"),
            OperatorKind::QuadratureProduct(k, a, b) => write!(f, "product:{k}:{a:?}{b:?}"),
            OperatorKind::TopLevel(k) => write!(f, "top_level:{k}"),
            OperatorKind::Identity => write!(f, "identity"),
            OperatorKind::Sum(terms) => {
                write!(f, "sum(")?;
                for (i, (c, k)) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "({c})*{k}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Parses `name:site` for the single-site kinds and `identity`.
impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "identity" {
            return Ok(OperatorKind::Identity);
        }
        let (name, site) = s
            .split_once(':')
            .ok_or_else(|| Error::Parameter(format!("unknown operator kind `{s}`")))?;
        let k: usize = site
            .parse()
            .map_err(|_| Error::Parameter(format!("bad site index in `{s}`")))?;
        Ok(match name {
            "pauli_x" => OperatorKind::PauliX(k),
            "pauli_y" => OperatorKind::PauliY(k),
            "pauli_z" => OperatorKind::PauliZ(k),
            "truncated_x" => OperatorKind::TruncatedX(k),
            "truncated_p" => OperatorKind::TruncatedP(k),
            "annihilation" => OperatorKind::Annihilation(k),
            "top_level" => OperatorKind::TopLevel(k),
            _ => return Err(Error::Parameter(format!("unknown operator kind `{name}`"))),
        })
    }
}

/// Sparse complex operator on a tensor-product space.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    dims: Vec<usize>,
    mat: CsrMatrix<Complex64>,
}

impl DenseOperator {
    pub fn from_csr(spec: &HilbertSpec, mat: CsrMatrix<Complex64>) -> Result<Self> {
        let n = spec.dim();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::Dimension(format!(
                "operator is {}x{}, space has dimension {n}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(DenseOperator { dims: spec.dims().to_vec(), mat })
    }

    pub fn from_dense(spec: &HilbertSpec, m: &DMatrix<Complex64>) -> Result<Self> {
        Self::from_csr(spec, to_csr(m))
    }

    pub fn zero(spec: &HilbertSpec) -> Self {
        let n = spec.dim();
        DenseOperator { dims: spec.dims().to_vec(), mat: CsrMatrix::zeros(n, n) }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn csr(&self) -> &CsrMatrix<Complex64> {
        &self.mat
    }

    fn same_space(&self, other: &DenseOperator) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Dimension(format!(
                "operators act on {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.same_space(other)?;
        Ok(DenseOperator { dims: self.dims.clone(), mat: &self.mat + &other.mat })
    }

    pub fn scale(&self, c: Complex64) -> DenseOperator {
        let mut mat = self.mat.clone();
        mat.values_mut().iter_mut().for_each(|v| *v *= c);
        DenseOperator { dims: self.dims.clone(), mat }
    }

    /// `self · other`.
    pub fn compose(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.same_space(other)?;
        Ok(DenseOperator { dims: self.dims.clone(), mat: &self.mat * &other.mat })
    }

    pub fn adjoint(&self) -> DenseOperator {
        let mut mat = self.mat.transpose();
        mat.values_mut().iter_mut().for_each(|v| *v = v.conj());
        DenseOperator { dims: self.dims.clone(), mat }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, j, v) in self.mat.triplet_iter() {
            m[(i, j)] += *v;
        }
        m
    }

    /// Largest entry of `A − A†`.
    pub fn hermiticity_error(&self) -> f64 {
        let diff = &self.mat - &self.adjoint().mat;
        diff.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, psi: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(psi.len());
        for (i, row) in self.mat.row_iter().enumerate() {
            let mut acc = C0;
            for (&j, v) in row.col_indices().iter().zip(row.values()) {
                acc += v * psi[j];
            }
            out[i] = acc;
        }
        out
    }

    /// `Tr(A ρ)`.
    pub fn expectation(&self, rho: &DMatrix<Complex64>) -> Complex64 {
        self.mat.triplet_iter().map(|(i, j, v)| v * rho[(j, i)]).sum()
    }
}

pub(crate) fn to_csr(m: &DMatrix<Complex64>) -> CsrMatrix<Complex64> {
    let mut coo = CooMatrix::new(m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] != C0 {
                coo.push(i, j, m[(i, j)]);
            }
        }
    }
    CsrMatrix::from(&coo)
}

fn kron(a: &CsrMatrix<Complex64>, b: &CsrMatrix<Complex64>) -> CsrMatrix<Complex64> {
    let (br, bc) = (b.nrows(), b.ncols());
    let mut coo = CooMatrix::new(a.nrows() * br, a.ncols() * bc);
    for (i, j, x) in a.triplet_iter() {
        for (k, l, y) in b.triplet_iter() {
            coo.push(i * br + k, j * bc + l, x * y);
        }
    }
    CsrMatrix::from(&coo)
}

/// Ladder operator on `d` levels.
pub fn annihilation(d: usize) -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = Complex64::from((n as f64).sqrt());
    }
    a
}

/// Truncated position quadrature on `d` levels.
pub fn truncated_x(d: usize) -> DMatrix<Complex64> {
    let a = annihilation(d);
    (&a + a.adjoint()) * Complex64::from(std::f64::consts::FRAC_1_SQRT_2)
}

/// Truncated momentum quadrature on `d` levels.
pub fn truncated_p(d: usize) -> DMatrix<Complex64> {
    let a = annihilation(d);
    (&a - a.adjoint()) * Complex64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2)
}

fn quadrature_product(d: usize, q1: Quadrature, q2: Quadrature) -> DMatrix<Complex64> {
    let big = |q| match q {
        Quadrature::X => truncated_x(d + 1),
        Quadrature::P => truncated_p(d + 1),
    };
    (big(q1) * big(q2)).view((0, 0), (d, d)).into_owned()
}

fn pauli(kind: char) -> DMatrix<Complex64> {
    match kind {
        'x' => DMatrix::from_row_slice(2, 2, &[C0, C1, C1, C0]),
        'y' => DMatrix::from_row_slice(2, 2, &[C0, -CI, CI, C0]),
        _ => DMatrix::from_row_slice(2, 2, &[C1, C0, C0, -C1]),
    }
}

fn local(spec: &HilbertSpec, site: usize, m: DMatrix<Complex64>) -> CsrMatrix<Complex64> {
    let dims = spec.dims();
    let mut acc = CsrMatrix::identity(1);
    for (k, &d) in dims.iter().enumerate() {
        let factor = if k == site { to_csr(&m) } else { CsrMatrix::identity(d) };
        acc = kron(&acc, &factor);
    }
    acc
}

fn site_dim(spec: &HilbertSpec, site: usize) -> Result<usize> {
    spec.dims().get(site).copied().ok_or_else(|| {
        Error::Parameter(format!("site {site} outside {}-subsystem space", spec.n_subsystems()))
    })
}

fn qubit_site(spec: &HilbertSpec, site: usize) -> Result<()> {
    match site_dim(spec, site)? {
        2 => Ok(()),
        d => Err(Error::Parameter(format!("Pauli operator on site {site} of dimension {d}"))),
    }
}

/// Builds an operator embedded with identities on the untouched factors.
pub fn build_operator(spec: &HilbertSpec, kind: &OperatorKind) -> Result<DenseOperator> {
    let mat = match kind {
        OperatorKind::PauliX(k) | OperatorKind::PauliY(k) | OperatorKind::PauliZ(k) => {
            qubit_site(spec, *k)?;
            let c = match kind {
                OperatorKind::PauliX(_) => 'x',
                OperatorKind::PauliY(_) => 'y',
                _ => 'z',
            };
            local(spec, *k, pauli(c))
        }
        OperatorKind::TruncatedX(k) => local(spec, *k, truncated_x(site_dim(spec, *k)?)),
        OperatorKind::TruncatedP(k) => local(spec, *k, truncated_p(site_dim(spec, *k)?)),
        OperatorKind::Annihilation(k) => local(spec, *k, annihilation(site_dim(spec, *k)?)),
        OperatorKind::QuadratureProduct(k, a, b) => {
            local(spec, *k, quadrature_product(site_dim(spec, *k)?, *a, *b))
        }
        OperatorKind::TopLevel(k) => {
            let d = site_dim(spec, *k)?;
            let mut m = DMatrix::zeros(d, d);
            m[(d - 1, d - 1)] = C1;
            local(spec, *k, m)
        }
        OperatorKind::Identity => CsrMatrix::identity(spec.dim()),
        OperatorKind::Sum(terms) => {
            let mut acc = DenseOperator::zero(spec);
            for (c, k) in terms {
                acc = acc.add(&build_operator(spec, k)?.scale(*c))?;
            }
            return Ok(acc);
        }
    };
    DenseOperator::from_csr(spec, mat)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::from(x)
    }

    #[test]
    fn pauli_placement() {
        let spec = HilbertSpec::new(vec![2, 2]).unwrap();
        let sx1 = build_operator(&spec, &OperatorKind::PauliX(0)).unwrap().to_dense();
        let expect = pauli('x').kronecker(&DMatrix::identity(2, 2));
        assert_eq!(sx1, expect);
        let sx2 = build_operator(&spec, &OperatorKind::PauliX(1)).unwrap().to_dense();
        assert_eq!(sx2, DMatrix::identity(2, 2).kronecker(&pauli('x')));
    }

    #[test]
    fn sigma_sum_spectrum() {
        let spec = HilbertSpec::new(vec![2, 2]).unwrap();
        let kind = OperatorKind::Sum(vec![
            (c(0.5), OperatorKind::PauliX(0)),
            (c(0.35), OperatorKind::PauliX(1)),
        ]);
        let m = build_operator(&spec, &kind).unwrap().to_dense();
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip([-0.85, -0.15, 0.15, 0.85]) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn truncated_x_two_levels_is_scaled_pauli() {
        let diff = truncated_x(2) - pauli('x') * c(std::f64::consts::FRAC_1_SQRT_2);
        assert!(diff.norm() < 1e-15);
    }

    #[test]
    fn commutator_exact_below_top_level() {
        let d = 6;
        let x = truncated_x(d);
        let p = truncated_p(d);
        let comm = &x * &p - &p * &x;
        for n in 0..d - 1 {
            assert!((comm[(n, n)] - CI).norm() < 1e-12);
        }
        assert!((comm[(d - 1, d - 1)] + CI * c((d - 1) as f64)).norm() < 1e-12);
    }

    #[test]
    fn restricted_square_matches_number_operator() {
        let d = 5;
        let xx = quadrature_product(d, Quadrature::X, Quadrature::X);
        let pp = quadrature_product(d, Quadrature::P, Quadrature::P);
        let sum = xx + pp;
        for n in 0..d {
            assert!((sum[(n, n)] - c(2.0 * n as f64 + 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            HilbertSpec::new(vec![16, 16, 17]),
            Err(Error::DimensionOverflow { .. })
        ));
        assert!(HilbertSpec::new(vec![1, 2]).is_err());
        let spec = HilbertSpec::new(vec![2, 3]).unwrap();
        assert!(build_operator(&spec, &OperatorKind::PauliX(1)).is_err());
        assert!(build_operator(&spec, &OperatorKind::TruncatedX(2)).is_err());
        assert!("spin_x:0".parse::<OperatorKind>().is_err());
        assert_eq!("truncated_x:1".parse::<OperatorKind>().unwrap(), OperatorKind::TruncatedX(1));
    }

    #[test]
    fn algebra() {
        let spec = HilbertSpec::new(vec![3, 2]).unwrap();
        let a = build_operator(&spec, &OperatorKind::Annihilation(0)).unwrap();
        let n = a.adjoint().compose(&a).unwrap().to_dense();
        assert!((n[(2 * 2, 2 * 2)] - c(2.0)).norm() < 1e-12);
        assert!(a.hermiticity_error() > 0.5);
        let x = build_operator(&spec, &OperatorKind::TruncatedX(0)).unwrap();
        assert!(x.hermiticity_error() < 1e-15);
    }
}
