use nalgebra::DMatrix;
use nalgebra_sparse::ops::serial::spmm_csr_dense;
use nalgebra_sparse::ops::Op;
use nalgebra_sparse::CsrMatrix;
use num_complex::Complex64;

use super::space::DenseOperator;
use super::state::DenseState;
use crate::error::{Error, Result};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const CI: Complex64 = Complex64::new(0.0, 1.0);

/// Step size and trace tolerance for master-equation runs.
#[derive(Debug, Clone)]
pub struct LindbladConfig {
    pub dt: f64,
    /// Largest allowed trace change in one step before renormalization.
    pub trace_tol: f64,
}

impl Default for LindbladConfig {
    fn default() -> Self {
        LindbladConfig { dt: 1e-3, trace_tol: 1e-8 }
    }
}

impl LindbladConfig {
    pub fn with_dt(dt: f64) -> Self {
        LindbladConfig { dt, ..Default::default() }
    }
}

/// `ρ̇ = −i(Kρ − ρK†) + Σ LρL†` with `K = H − (i/2) Σ L†L`.
struct Liouvillian {
    k: CsrMatrix<Complex64>,
    jumps: Vec<CsrMatrix<Complex64>>,
    prod: DMatrix<Complex64>,
    adj: DMatrix<Complex64>,
}

impl Liouvillian {
    fn new(h: &DenseOperator, jumps: &[DenseOperator]) -> Result<Self> {
        let mut k = h.clone();
        for l in jumps {
            let ldl = l.adjoint().compose(l)?;
            k = k.add(&ldl.scale(Complex64::new(0.0, -0.5)))?;
        }
        let n = h.dim();
        Ok(Liouvillian {
            k: k.csr().clone(),
            jumps: jumps.iter().map(|l| l.csr().clone()).collect(),
            prod: DMatrix::zeros(n, n),
            adj: DMatrix::zeros(n, n),
        })
    }

    /// Writes `f(ρ)` into `out`. `ρ` must be Hermitian.
    fn rhs(&mut self, rho: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>) {
        spmm_csr_dense(C0, &mut self.prod, C1, Op::NoOp(&self.k), Op::NoOp(rho));
        self.prod.adjoint_to(&mut self.adj);
        for ((o, p), a) in out.iter_mut().zip(self.prod.iter()).zip(self.adj.iter()) {
            *o = -CI * p + CI * a;
        }
        for l in &self.jumps {
            spmm_csr_dense(C0, &mut self.prod, C1, Op::NoOp(l), Op::NoOp(rho));
            self.prod.adjoint_to(&mut self.adj);
            spmm_csr_dense(C1, &mut *out, C1, Op::NoOp(l), Op::NoOp(&self.adj));
        }
    }
}

fn check_space(state: &DenseState, h: &DenseOperator, jumps: &[DenseOperator]) -> Result<()> {
    let dims = state.dims();
    if h.dims() != dims || jumps.iter().any(|l| l.dims() != dims) {
        return Err(Error::Dimension("operators and state act on different spaces".into()));
    }
    Ok(())
}

struct Rk4 {
    liou: Liouvillian,
    k: [DMatrix<Complex64>; 4],
    stage: DMatrix<Complex64>,
    tol: f64,
}

impl Rk4 {
    fn step(&mut self, rho: &mut DMatrix<Complex64>, h: f64) -> Result<()> {
        let tol = self.tol;
        let Rk4 { liou, k, stage, .. } = self;
        let hc = Complex64::from(h);
        liou.rhs(rho, &mut k[0]);
        for (s, (r, d)) in stage.iter_mut().zip(rho.iter().zip(k[0].iter())) {
            *s = r + hc * 0.5 * d;
        }
        liou.rhs(stage, &mut k[1]);
        for (s, (r, d)) in stage.iter_mut().zip(rho.iter().zip(k[1].iter())) {
            *s = r + hc * 0.5 * d;
        }
        liou.rhs(stage, &mut k[2]);
        for (s, (r, d)) in stage.iter_mut().zip(rho.iter().zip(k[2].iter())) {
            *s = r + hc * d;
        }
        liou.rhs(stage, &mut k[3]);
        let w = hc / 6.0;
        for (i, r) in rho.iter_mut().enumerate() {
            *r += w * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
        let tr = rho.trace().re;
        if !tr.is_finite() || (tr - 1.0).abs() > tol {
            return Err(Error::TraceDrift { drift: tr - 1.0 });
        }
        rho.adjoint_to(stage);
        let scale = Complex64::from(0.5 / tr);
        for (r, a) in rho.iter_mut().zip(stage.iter()) {
            *r = (*r + a) * scale;
        }
        Ok(())
    }
}

/// Integrates the master equation over `duration` with RK4, returning the
/// density matrix at the end.
pub fn evolve_lindblad(
    state: &DenseState,
    h: &DenseOperator,
    jumps: &[DenseOperator],
    duration: f64,
    cfg: &LindbladConfig,
) -> Result<DenseState> {
    Ok(evolve_lindblad_sampled(state, h, jumps, &[duration], cfg)?
        .pop()
        .map(|(_, s)| s)
        .expect("one sample requested"))
}

/// Like [`evolve_lindblad`] but returns the state at each of the ascending
/// `sample_times`.
pub fn evolve_lindblad_sampled(
    state: &DenseState,
    h: &DenseOperator,
    jumps: &[DenseOperator],
    sample_times: &[f64],
    cfg: &LindbladConfig,
) -> Result<Vec<(f64, DenseState)>> {
    check_space(state, h, jumps)?;
    if !(cfg.dt > 0.0) {
        return Err(Error::Parameter(format!("step {} must be positive", cfg.dt)));
    }
    if sample_times.iter().any(|&t| t < 0.0) || sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Parameter("sample times must be ascending and non-negative".into()));
    }
    let n = state.dim();
    let dims = state.dims().to_vec();
    let mut rho = state.density();
    let mut rk = Rk4 {
        liou: Liouvillian::new(h, jumps)?,
        k: std::array::from_fn(|_| DMatrix::zeros(n, n)),
        stage: DMatrix::zeros(n, n),
        tol: cfg.trace_tol,
    };
    let mut out = Vec::with_capacity(sample_times.len());
    let mut t = 0.0;
    for &target in sample_times {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / cfg.dt - 1e-9).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                rk.step(&mut rho, h)?;
            }
        }
        t = target;
        out.push((t, DenseState::Mixed { dims: dims.clone(), rho: rho.clone() }));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::measures::dense_log_negativity;
    use crate::dense::space::{build_operator, HilbertSpec, OperatorKind};

    #[test]
    fn zero_generator_leaves_state() {
        let spec = HilbertSpec::new(vec![2, 3]).unwrap();
        let s = DenseState::basis_product(&spec, &[1, 0]).unwrap();
        let h = DenseOperator::zero(&spec);
        let out = evolve_lindblad(&s, &h, &[], 1.0, &LindbladConfig::default()).unwrap();
        assert!((out.density() - s.density()).norm() < 1e-15);
    }

    #[test]
    fn amplitude_damping_closed_form() {
        let spec = HilbertSpec::new(vec![2]).unwrap();
        let s = DenseState::basis_product(&spec, &[1]).unwrap();
        let h = DenseOperator::zero(&spec);
        let kappa: f64 = 0.7;
        let l = build_operator(&spec, &OperatorKind::Annihilation(0))
            .unwrap()
            .scale(Complex64::from(kappa.sqrt()));
        let out = evolve_lindblad(&s, &h, &[l], 2.0, &LindbladConfig::with_dt(1e-2)).unwrap();
        let p1 = out.density()[(1, 1)].re;
        assert!((p1 - (-kappa * 2.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn rabi_oscillation() {
        let spec = HilbertSpec::new(vec![2]).unwrap();
        let s = DenseState::basis_product(&spec, &[0]).unwrap();
        let h = build_operator(&spec, &OperatorKind::PauliX(0)).unwrap().scale(Complex64::from(0.5));
        let t = 1.3;
        let out = evolve_lindblad(&s, &h, &[], t, &LindbladConfig::default()).unwrap();
        assert!((out.density()[(1, 1)].re - (t / 2.0).sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn dephasing_kills_entanglement_and_keeps_validity() {
        let spec = HilbertSpec::new(vec![2, 2]).unwrap();
        let hs = std::f64::consts::FRAC_1_SQRT_2;
        let psi = nalgebra::DVector::from_vec(vec![
            Complex64::from(hs),
            C0,
            C0,
            Complex64::from(hs),
        ]);
        let s = DenseState::pure(&spec, psi).unwrap();
        let l = build_operator(&spec, &OperatorKind::PauliZ(0)).unwrap();
        let h = DenseOperator::zero(&spec);
        let times = [0.1, 0.5, 3.0];
        let out = evolve_lindblad_sampled(&s, &h, &[l], &times, &LindbladConfig::default()).unwrap();
        for (t, st) in &out {
            assert!(st.check().unwrap().is_valid(1e-10));
            // coherence decays as e^{-2t}; E_N = ln(1 + e^{-2t})
            let en = dense_log_negativity(st, &[0]).unwrap();
            assert!((en - (1.0 + (-2.0 * t).exp()).ln()).abs() < 1e-9, "{t} {en}");
        }
    }

    #[test]
    fn mismatched_space() {
        let a = HilbertSpec::new(vec![2]).unwrap();
        let b = HilbertSpec::new(vec![3]).unwrap();
        let s = DenseState::basis_product(&a, &[0]).unwrap();
        let h = DenseOperator::zero(&b);
        assert!(evolve_lindblad(&s, &h, &[], 1.0, &LindbladConfig::default()).is_err());
    }
}
