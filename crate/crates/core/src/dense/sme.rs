use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::ops::serial::spmm_csr_dense;
use nalgebra_sparse::ops::Op;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::space::DenseOperator;
use super::state::DenseState;
use crate::error::{Error, Result};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Step size and sample grid for diffusive trajectories.
#[derive(Debug, Clone)]
pub struct SmeConfig {
    pub dt: f64,
    /// Ascending times at which the state is recorded.
    pub sample_times: Vec<f64>,
}

impl Default for SmeConfig {
    fn default() -> Self {
        SmeConfig { dt: 1e-4, sample_times: Vec::new() }
    }
}

/// Recorded pure states of one trajectory.
#[derive(Debug, Clone)]
pub struct SmePath {
    pub seed: u64,
    pub dims: Vec<usize>,
    pub times: Vec<f64>,
    pub states: Vec<DVector<Complex64>>,
}

impl SmePath {
    pub fn state(&self, i: usize) -> DenseState {
        DenseState::Pure { dims: self.dims.clone(), psi: self.states[i].clone() }
    }
}

/// Monitored dynamics: Hamiltonian, Hermitian monitor and its rate.
#[derive(Debug, Clone)]
pub struct SmeProblem {
    pub hamiltonian: DenseOperator,
    pub monitor: DenseOperator,
    pub rate: f64,
}

impl SmeProblem {
    pub fn new(hamiltonian: DenseOperator, monitor: DenseOperator, rate: f64) -> Result<Self> {
        if hamiltonian.dims() != monitor.dims() {
            return Err(Error::Dimension("Hamiltonian and monitor act on different spaces".into()));
        }
        if !(rate >= 0.0) {
            return Err(Error::Parameter(format!("monitor rate {rate} must be non-negative")));
        }
        let err = monitor.hermiticity_error();
        if err > 1e-12 {
            return Err(Error::Parameter(format!("monitor is not Hermitian (error {err:e})")));
        }
        Ok(SmeProblem { hamiltonian, monitor, rate })
    }
}

fn dot(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Euler–Maruyama integration of
/// `dψ = [−iH − (γ/2)(L−⟨L⟩)²]ψ dt + √γ(L−⟨L⟩)ψ dW`,
/// renormalized after every step.
pub fn sample_sme_trajectory(
    initial: &DenseState,
    problem: &SmeProblem,
    cfg: &SmeConfig,
    seed: u64,
) -> Result<SmePath> {
    let psi0 = match initial {
        DenseState::Pure { psi, dims } => {
            if dims.as_slice() != problem.monitor.dims() {
                return Err(Error::Dimension("state and monitor act on different spaces".into()));
            }
            psi
        }
        DenseState::Mixed { .. } => {
            return Err(Error::Unsupported("trajectories need a pure initial state".into()))
        }
    };
    if !(cfg.dt > 0.0) {
        return Err(Error::Parameter(format!("step {} must be positive", cfg.dt)));
    }
    if cfg.sample_times.iter().any(|&t| t < 0.0) || cfg.sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Parameter("sample times must be ascending and non-negative".into()));
    }
    let n = psi0.len();
    let h = problem.hamiltonian.csr();
    let l = problem.monitor.csr();
    let g = problem.rate;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut psi = DMatrix::from_column_slice(n, 1, psi0.as_slice());
    let mut lpsi = DMatrix::zeros(n, 1);
    let mut l2psi = DMatrix::zeros(n, 1);
    let mut hpsi = DMatrix::zeros(n, 1);
    let mut path = SmePath { seed, dims: initial.dims().to_vec(), times: Vec::new(), states: Vec::new() };
    let mut t = 0.0;
    for &target in &cfg.sample_times {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / cfg.dt - 1e-9).ceil().max(1.0) as usize;
            let dt = span / steps as f64;
            let sdt = dt.sqrt();
            for _ in 0..steps {
                spmm_csr_dense(C0, &mut hpsi, C1, Op::NoOp(h), Op::NoOp(&psi));
                spmm_csr_dense(C0, &mut lpsi, C1, Op::NoOp(l), Op::NoOp(&psi));
                let mean = dot(&psi, &lpsi).re;
                // lpsi <- (L − ⟨L⟩)ψ
                for (a, p) in lpsi.iter_mut().zip(psi.iter()) {
                    *a -= p * mean;
                }
                spmm_csr_dense(C0, &mut l2psi, C1, Op::NoOp(l), Op::NoOp(&lpsi));
                let dw: f64 = StandardNormal.sample(&mut rng);
                let noise = g.sqrt() * sdt * dw;
                for i in 0..n {
                    let l2 = l2psi[i] - lpsi[i] * mean;
                    let drift = Complex64::new(0.0, -1.0) * hpsi[i] - 0.5 * g * l2;
                    psi[i] += drift * dt + lpsi[i] * noise;
                }
                let norm = psi.norm();
                if !norm.is_finite() || norm < 1e-12 {
                    return Err(Error::NormCollapse);
                }
                psi /= Complex64::from(norm);
            }
        }
        t = target;
        path.times.push(t);
        path.states.push(DVector::from_column_slice(psi.as_slice()));
    }
    Ok(path)
}

/// Independent trajectories with seeds `base_seed + k`.
pub fn sample_sme_ensemble(
    initial: &DenseState,
    problem: &SmeProblem,
    cfg: &SmeConfig,
    base_seed: u64,
    count: usize,
) -> Result<Vec<SmePath>> {
    (0..count as u64)
        .into_par_iter()
        .map(|k| sample_sme_trajectory(initial, problem, cfg, base_seed.wrapping_add(k)))
        .collect()
}

/// Ensemble average of `ψψ†` at sample index `i`.
pub fn ensemble_density(paths: &[SmePath], i: usize) -> DMatrix<Complex64> {
    let n = paths[0].states[i].len();
    let mut rho = DMatrix::zeros(n, n);
    for p in paths {
        let psi = &p.states[i];
        rho += psi * psi.adjoint();
    }
    rho / Complex64::from(paths.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::lindblad::{evolve_lindblad_sampled, LindbladConfig};
    use crate::dense::space::{build_operator, HilbertSpec, OperatorKind};

    fn two_qubits() -> (HilbertSpec, DenseState, DenseOperator) {
        let spec = HilbertSpec::new(vec![2, 2]).unwrap();
        let s = DenseState::basis_product(&spec, &[1, 1]).unwrap();
        let kind = OperatorKind::Sum(vec![
            (Complex64::from(0.5), OperatorKind::PauliX(0)),
            (Complex64::from(0.35), OperatorKind::PauliX(1)),
        ]);
        (spec.clone(), s, build_operator(&spec, &kind).unwrap())
    }

    #[test]
    fn zero_rate_is_schrodinger() {
        let spec = HilbertSpec::new(vec![2]).unwrap();
        let s = DenseState::basis_product(&spec, &[0]).unwrap();
        let h = build_operator(&spec, &OperatorKind::PauliX(0)).unwrap().scale(Complex64::from(0.5));
        let prob = SmeProblem::new(h, DenseOperator::zero(&spec), 0.0).unwrap();
        let cfg = SmeConfig { dt: 1e-4, sample_times: vec![1.0] };
        let p = sample_sme_trajectory(&s, &prob, &cfg, 3).unwrap();
        // Euler drift error is O(dt) before renormalization
        assert!((p.states[0][1].norm_sqr() - 0.5f64.sin().powi(2)).abs() < 1e-4);
    }

    #[test]
    fn deterministic_per_seed() {
        let (spec, s, l) = two_qubits();
        let prob = SmeProblem::new(DenseOperator::zero(&spec), l, 1.0).unwrap();
        let cfg = SmeConfig { dt: 1e-3, sample_times: vec![0.5, 1.0] };
        let a = sample_sme_trajectory(&s, &prob, &cfg, 11).unwrap();
        let b = sample_sme_trajectory(&s, &prob, &cfg, 11).unwrap();
        let c = sample_sme_trajectory(&s, &prob, &cfg, 12).unwrap();
        assert_eq!(a.states, b.states);
        assert_ne!(a.states, c.states);
    }

    #[test]
    fn ensemble_average_matches_master_equation() {
        let (spec, s, l) = two_qubits();
        let prob = SmeProblem::new(DenseOperator::zero(&spec), l.clone(), 1.0).unwrap();
        let cfg = SmeConfig { dt: 1e-3, sample_times: vec![0.5, 1.0] };
        let count = 1000;
        let paths = sample_sme_ensemble(&s, &prob, &cfg, 100, count).unwrap();
        let exact = evolve_lindblad_sampled(
            &s,
            &DenseOperator::zero(&spec),
            &[l],
            &cfg.sample_times,
            &LindbladConfig::default(),
        )
        .unwrap();
        for (i, (_, st)) in exact.iter().enumerate() {
            let diff = ensemble_density(&paths, i) - st.density();
            let ev = ((&diff + diff.adjoint()) * Complex64::from(0.5)).symmetric_eigenvalues();
            let trace_distance = 0.5 * ev.iter().map(|v| v.abs()).sum::<f64>();
            assert!(trace_distance < 3.0 / (count as f64).sqrt(), "{trace_distance}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let (spec, s, l) = two_qubits();
        let a = build_operator(&spec, &OperatorKind::Annihilation(0)).unwrap();
        assert!(SmeProblem::new(DenseOperator::zero(&spec), a, 1.0).is_err());
        let prob = SmeProblem::new(DenseOperator::zero(&spec), l, 1.0).unwrap();
        let mixed = DenseState::Mixed { dims: vec![2, 2], rho: s.density() };
        assert!(sample_sme_trajectory(&mixed, &prob, &SmeConfig::default(), 0).is_err());
    }
}
