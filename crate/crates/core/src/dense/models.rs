use num_complex::Complex64;

use super::lindblad::{evolve_lindblad_sampled, LindbladConfig};
use super::measures::{dense_log_negativity, mutual_information, partial_trace, von_neumann_entropy};
use super::sme::SmeProblem;
use super::space::{build_operator, DenseOperator, HilbertSpec, OperatorKind, Quadrature};
use super::state::DenseState;
use crate::error::{Error, Result};
use crate::protocols::Variant;

fn c(x: f64) -> Complex64 {
    Complex64::from(x)
}

/// Master-equation model with a default bipartition.
#[derive(Debug, Clone)]
pub struct DenseModel {
    pub spec: HilbertSpec,
    pub labels: Vec<String>,
    pub hamiltonian: DenseOperator,
    pub jumps: Vec<DenseOperator>,
    pub initial: DenseState,
    /// Subsystems on side A of the default bipartition.
    pub side_a: Vec<usize>,
}

impl DenseModel {
    pub fn run(&self, sample_times: &[f64], cfg: &LindbladConfig) -> Result<Vec<(f64, DenseState)>> {
        evolve_lindblad_sampled(&self.initial, &self.hamiltonian, &self.jumps, sample_times, cfg)
    }

    /// `(t, E_N)` across the default bipartition.
    pub fn log_negativity_series(&self, sample_times: &[f64], cfg: &LindbladConfig) -> Result<Vec<(f64, f64)>> {
        self.run(sample_times, cfg)?
            .iter()
            .map(|(t, s)| Ok((*t, dense_log_negativity(s, &self.side_a)?)))
            .collect()
    }
}

/// `(σ_x,1 + 0.7 σ_x,2)/2` on the first two subsystems.
fn sigma_x_sum() -> OperatorKind {
    OperatorKind::Sum(vec![(c(0.5), OperatorKind::PauliX(0)), (c(0.35), OperatorKind::PauliX(1))])
}

/// Two qubits and a `d`-level register fed forward through its truncated
/// quadrature `F`: `H = γη Σ_x F`, jump `√γ(Σ_x − iηF)`. Starts in
/// `|↓↓⟩ ⊗ |0⟩`; the bipartition is qubit 1 | (qubit 2, register).
pub fn qubit_register(d: usize, eta: f64, gamma: f64) -> Result<DenseModel> {
    check_rates(gamma, eta)?;
    let spec = HilbertSpec::new(vec![2, 2, d])?;
    let sx = build_operator(&spec, &sigma_x_sum())?;
    let f = build_operator(&spec, &OperatorKind::TruncatedX(2))?;
    let hamiltonian = sx.compose(&f)?.scale(c(gamma * eta));
    let jump = sx.add(&f.scale(Complex64::new(0.0, -eta)))?.scale(c(gamma.sqrt()));
    Ok(DenseModel {
        initial: DenseState::basis_product(&spec, &[1, 1, 0])?,
        labels: vec!["q1".into(), "q2".into(), "c".into()],
        spec,
        hamiltonian,
        jumps: vec![jump],
        side_a: vec![0],
    })
}

/// Continuous monitoring of `Σ_x` on two qubits with no Hamiltonian,
/// starting from `|↓↓⟩`.
pub fn monitored_qubits(gamma: f64) -> Result<(DenseState, SmeProblem)> {
    check_rates(gamma, 0.0)?;
    let spec = HilbertSpec::new(vec![2, 2])?;
    let sx = build_operator(&spec, &sigma_x_sum())?;
    let problem = SmeProblem::new(DenseOperator::zero(&spec), sx, gamma)?;
    Ok((DenseState::basis_product(&spec, &[1, 1])?, problem))
}

fn check_rates(gamma: f64, eta: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Parameter(format!("gamma = {gamma} must be positive")));
    }
    if !eta.is_finite() {
        return Err(Error::Parameter(format!("eta = {eta} must be finite")));
    }
    Ok(())
}

/// Parameters of a Fock-truncated version of the two-mode protocols.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedParams {
    pub gamma: f64,
    pub eta: f64,
    pub omega: f64,
    pub delta_omega: f64,
}

impl Default for TruncatedParams {
    fn default() -> Self {
        TruncatedParams { gamma: 1.0, eta: 1.0, omega: 0.0, delta_omega: 0.0 }
    }
}

/// Modes `a`, `b` (and register `c1` where the variant has one), each kept
/// to `n_tr` Fock levels and started in vacuum. Supports the dephasing,
/// single-register feedforward and dissipative-only variants.
pub fn truncated_oscillators(variant: Variant, n_tr: usize, p: TruncatedParams) -> Result<DenseModel> {
    check_rates(p.gamma, p.eta)?;
    let (dims, labels) = match variant {
        Variant::Dephasing => (vec![n_tr; 2], vec!["a", "b"]),
        Variant::Feedforward | Variant::DissipativeOnly => (vec![n_tr; 3], vec!["a", "b", "c1"]),
        v => {
            return Err(Error::Unsupported(format!("no truncated model for variant `{v}`")));
        }
    };
    let spec = HilbertSpec::new(dims)?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let xp = build_operator(
        &spec,
        &OperatorKind::Sum(vec![(c(r), OperatorKind::TruncatedX(0)), (c(r), OperatorKind::TruncatedX(1))]),
    )?;
    let mut hamiltonian = DenseOperator::zero(&spec);
    for (site, w) in [(0, p.omega + p.delta_omega), (1, p.delta_omega - p.omega)] {
        if w != 0.0 {
            let kind = OperatorKind::Sum(vec![
                (c(0.5 * w), OperatorKind::QuadratureProduct(site, Quadrature::X, Quadrature::X)),
                (c(0.5 * w), OperatorKind::QuadratureProduct(site, Quadrature::P, Quadrature::P)),
            ]);
            hamiltonian = hamiltonian.add(&build_operator(&spec, &kind)?)?;
        }
    }
    let g = p.gamma;
    let jumps = match variant {
        Variant::Dephasing => vec![xp.scale(c(g.sqrt()))],
        _ => {
            let y = build_operator(&spec, &OperatorKind::TruncatedX(2))?;
            let l = xp.add(&y.scale(Complex64::new(0.0, -p.eta)))?;
            if variant == Variant::Feedforward {
                hamiltonian = hamiltonian.add(&xp.compose(&y)?.scale(c(g * p.eta)))?;
                vec![l.scale(c(g.sqrt()))]
            } else {
                vec![l.scale(c((2.0 * g).sqrt()))]
            }
        }
    };
    let n = spec.n_subsystems();
    Ok(DenseModel {
        initial: DenseState::basis_product(&spec, &vec![0; n])?,
        labels: labels.into_iter().map(String::from).collect(),
        spec,
        hamiltonian,
        jumps,
        side_a: vec![0],
    })
}

/// Three `d`-level systems under the single-register feedforward dynamics
/// with `η = 1`. At `d = 2` this is the three-qubit protocol.
pub fn qudit_chain(d: usize, gamma: f64) -> Result<DenseModel> {
    truncated_oscillators(Variant::Feedforward, d, TruncatedParams { gamma, ..Default::default() })
}

/// Entanglement structure of the two-Bell-pair state with a classical
/// register qubit.
#[derive(Debug, Clone)]
pub struct BellRegisterReport {
    pub state: DenseState,
    /// `E_N` across qubit 1 | (2, 3).
    pub log_negativity_1_23: f64,
    /// `E_N` across (1, 2) | 3.
    pub log_negativity_12_3: f64,
    /// Mutual information between (1, 2) and 3.
    pub mutual_information_12_3: f64,
    /// Entropy of one qubit of either Bell pair, in nats.
    pub bell_entropy: f64,
}

/// Builds `½(ρ₊ ⊗ |↑⟩⟨↑| + ρ₋ ⊗ |↓⟩⟨↓|)` with `ρ±` the Bell pairs
/// `(|++⟩ + |−−⟩)/√2` and `(|+−⟩ + |−+⟩)/√2` of the σ_x eigenbasis.
pub fn bell_register_example() -> Result<BellRegisterReport> {
    let pair = HilbertSpec::new(vec![2, 2])?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let plus = nalgebra::DVector::from_vec(vec![c(r), c(r)]);
    let minus = nalgebra::DVector::from_vec(vec![c(r), c(-r)]);
    let kron = |a: &nalgebra::DVector<Complex64>, b: &nalgebra::DVector<Complex64>| a.kronecker(b);
    let phi_p = (kron(&plus, &plus) + kron(&minus, &minus)) * c(r);
    let phi_m = (kron(&plus, &minus) + kron(&minus, &plus)) * c(r);
    let rho_p = &phi_p * phi_p.adjoint();
    let rho_m = &phi_m * phi_m.adjoint();
    let mut up = nalgebra::DMatrix::zeros(2, 2);
    up[(0, 0)] = c(1.0);
    let mut down = nalgebra::DMatrix::zeros(2, 2);
    down[(1, 1)] = c(1.0);
    let rho = (rho_p.kronecker(&up) + rho_m.kronecker(&down)) * c(0.5);
    let spec = HilbertSpec::new(vec![2, 2, 2])?;
    let state = DenseState::mixed(&spec, rho)?;
    let bell = DenseState::pure(&pair, phi_p)?;
    Ok(BellRegisterReport {
        log_negativity_1_23: dense_log_negativity(&state, &[0])?,
        log_negativity_12_3: dense_log_negativity(&state, &[0, 1])?,
        mutual_information_12_3: mutual_information(&state, &[0, 1], &[2])?,
        bell_entropy: von_neumann_entropy(&partial_trace(&bell, &[1])?)?,
        state,
    })
}
