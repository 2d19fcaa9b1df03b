use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::state::DenseState;
use crate::error::{Error, Result};

pub(crate) fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

fn encode(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&l, &d)| acc * d + l)
}

/// Checks that `side_a` is a proper, non-empty subset of the subsystems and
/// returns the complement.
pub fn complement(dims: &[usize], side_a: &[usize]) -> Result<Vec<usize>> {
    if side_a.is_empty() {
        return Err(Error::Partition("side A is empty".into()));
    }
    let mut seen = vec![false; dims.len()];
    for &k in side_a {
        if k >= dims.len() {
            return Err(Error::Partition(format!("subsystem {k} out of range")));
        }
        if seen[k] {
            return Err(Error::Partition(format!("subsystem {k} listed twice")));
        }
        seen[k] = true;
    }
    let side_b: Vec<usize> = (0..dims.len()).filter(|&k| !seen[k]).collect();
    if side_b.is_empty() {
        return Err(Error::Partition("side B is empty".into()));
    }
    Ok(side_b)
}

/// Transposes the listed subsystems of `rho`.
pub fn partial_transpose(rho: &DMatrix<Complex64>, dims: &[usize], subsystems: &[usize]) -> DMatrix<Complex64> {
    let n = rho.nrows();
    let all: Vec<Vec<usize>> = (0..n).map(|i| digits(i, dims)).collect();
    let mut out = DMatrix::zeros(n, n);
    let mut di = vec![0; dims.len()];
    let mut dj = vec![0; dims.len()];
    for j in 0..n {
        for i in 0..n {
            di.copy_from_slice(&all[i]);
            dj.copy_from_slice(&all[j]);
            for &k in subsystems {
                std::mem::swap(&mut di[k], &mut dj[k]);
            }
            out[(encode(&di, dims), encode(&dj, dims))] = rho[(i, j)];
        }
    }
    out
}

fn hermitian_eigenvalues(m: DMatrix<Complex64>) -> Result<DVector<f64>> {
    let sym = (&m + m.adjoint()) * Complex64::from(0.5);
    Ok(sym
        .try_symmetric_eigen(1e-14, 0)
        .ok_or_else(|| Error::Eigen("Hermitian eigendecomposition did not converge".into()))?
        .eigenvalues)
}

/// Amplitudes of a pure state arranged as a (side A) × (side B) matrix.
fn schmidt_matrix(psi: &DVector<Complex64>, dims: &[usize], side_a: &[usize], side_b: &[usize]) -> DMatrix<Complex64> {
    let da: Vec<usize> = side_a.iter().map(|&k| dims[k]).collect();
    let db: Vec<usize> = side_b.iter().map(|&k| dims[k]).collect();
    let (na, nb): (usize, usize) = (da.iter().product(), db.iter().product());
    let mut m = DMatrix::zeros(na, nb);
    for (i, amp) in psi.iter().enumerate() {
        let d = digits(i, dims);
        let ia: Vec<usize> = side_a.iter().map(|&k| d[k]).collect();
        let ib: Vec<usize> = side_b.iter().map(|&k| d[k]).collect();
        m[(encode(&ia, &da), encode(&ib, &db))] = *amp;
    }
    m
}

fn schmidt_coefficients(psi: &DVector<Complex64>, dims: &[usize], side_a: &[usize], side_b: &[usize]) -> Result<DVector<f64>> {
    let m = schmidt_matrix(psi, dims, side_a, side_b);
    Ok(m.try_svd(false, false, 1e-14, 0)
        .ok_or_else(|| Error::Eigen("Schmidt decomposition did not converge".into()))?
        .singular_values)
}

/// `ln ‖ρ^{T_B}‖₁` across `side_a | rest`, in nats.
pub fn dense_log_negativity(s: &DenseState, side_a: &[usize]) -> Result<f64> {
    let dims = s.dims();
    let side_b = complement(dims, side_a)?;
    match s {
        DenseState::Pure { psi, .. } => {
            let sv = schmidt_coefficients(psi, dims, side_a, &side_b)?;
            let sum: f64 = sv.iter().sum();
            Ok(2.0 * sum.ln())
        }
        DenseState::Mixed { rho, .. } => {
            let ev = hermitian_eigenvalues(partial_transpose(rho, dims, &side_b))?;
            let norm: f64 = ev.iter().map(|v| v.abs()).sum();
            Ok(norm.ln())
        }
    }
}

/// `ln(1 + 2|ad − bc|)` for the two-qubit state `a|00⟩ + b|01⟩ + c|10⟩ + d|11⟩`.
pub fn two_qubit_log_negativity(psi: &[Complex64; 4]) -> f64 {
    (1.0 + 2.0 * (psi[0] * psi[3] - psi[1] * psi[2]).norm()).ln()
}

/// Reduced density matrix on `keep`, in the order given.
pub fn partial_trace(s: &DenseState, keep: &[usize]) -> Result<DMatrix<Complex64>> {
    let dims = s.dims().to_vec();
    let traced = match complement(&dims, keep) {
        Ok(t) => t,
        Err(_) if keep.len() == dims.len() => return Ok(s.density()),
        Err(e) => return Err(e),
    };
    let dk: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let nk: usize = dk.iter().product();
    if let DenseState::Pure { psi, .. } = s {
        let m = schmidt_matrix(psi, &dims, keep, &traced);
        return Ok(&m * m.adjoint());
    }
    let rho = s.density();
    let n = rho.nrows();
    let all: Vec<Vec<usize>> = (0..n).map(|i| digits(i, &dims)).collect();
    let keyed: Vec<(usize, usize)> = all
        .iter()
        .map(|d| {
            let ik: Vec<usize> = keep.iter().map(|&k| d[k]).collect();
            let it: Vec<usize> = traced.iter().map(|&k| d[k]).collect();
            let dt: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
            (encode(&ik, &dk), encode(&it, &dt))
        })
        .collect();
    let mut out = DMatrix::zeros(nk, nk);
    for j in 0..n {
        for i in 0..n {
            if keyed[i].1 == keyed[j].1 {
                out[(keyed[i].0, keyed[j].0)] += rho[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Von Neumann entropy `−Tr ρ ln ρ` in nats.
pub fn von_neumann_entropy(rho: &DMatrix<Complex64>) -> Result<f64> {
    let ev = hermitian_eigenvalues(rho.clone())?;
    Ok(ev.iter().filter(|&&p| p > 1e-15).map(|&p| -p * p.ln()).sum())
}

/// `S(A) + S(B) − S(AB)` for disjoint subsystem lists, in nats.
pub fn mutual_information(s: &DenseState, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.iter().any(|k| b.contains(k)) {
        return Err(Error::Partition("subsystem lists overlap".into()));
    }
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    let sa = von_neumann_entropy(&partial_trace(s, a)?)?;
    let sb = von_neumann_entropy(&partial_trace(s, b)?)?;
    let sab = von_neumann_entropy(&partial_trace(s, &ab)?)?;
    Ok(sa + sb - sab)
}
