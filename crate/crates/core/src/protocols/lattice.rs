use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use super::params::{ScenarioParams, Variant};
use super::two_mode::{unit, Scenario};
use crate::dynamics::{
    assemble_generators, EvolutionMode, LinearJump, MonitoredQuadrature, QuadraticHamiltonian,
    Schedule,
};
use crate::error::{Error, Result};
use crate::gaussian::{log_negativity, GaussianState, ModeLayout, Partition};

/// Largest phase-space dimension a lattice scenario may allocate.
pub const MAX_QUADRATURES: usize = 2048;

/// Eigendecomposition of the ring bond matrix `K = Σ_j b_j b_jᵀ` with
/// `b_j = (e_j + e_{j+1})/√2`, so that `Σ_j m_j² = xᵀ K x`.
#[derive(Debug, Clone, PartialEq)]
pub struct BondSpectrum {
    /// Eigenvalues, descending.
    pub lambdas: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `lambdas`.
    pub basis: DMatrix<f64>,
}

impl BondSpectrum {
    pub fn bond_matrix(n: usize) -> DMatrix<f64> {
        let mut k = DMatrix::zeros(n, n);
        for j in 0..n {
            let b = (unit(n, j) + unit(n, (j + 1) % n)) / 2f64.sqrt();
            k += &b * b.transpose();
        }
        k
    }

    /// `O diag(λ) Oᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let l = DVector::from_column_slice(&self.lambdas);
        &self.basis * DMatrix::from_diagonal(&l) * self.basis.transpose()
    }
}

pub fn bond_spectrum(n: usize) -> Result<BondSpectrum> {
    if n < 2 {
        return Err(Error::Parameter(format!("a ring needs at least two sites, got {n}")));
    }
    let eig = SymmetricEigen::new(BondSpectrum::bond_matrix(n));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let lambdas = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let basis = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(BondSpectrum { lambdas, basis })
}

#[derive(Debug, Clone)]
pub struct LatticeScenario {
    pub scenario: Scenario,
    pub sites: Vec<String>,
    /// `registers_by_bond[j]` are the registers of the bond between sites
    /// `j` and `j + 1` (mod n), in window order.
    pub registers_by_bond: Vec<Vec<String>>,
}

/// Periodic chain of `n` sites `a1..an` with bonds `m_j = (x_j + x_{j+1})/√2`.
///
/// Site `s` has frequency `ω + δω` for even `s` and `δω − ω` for odd `s`, so
/// `ω = 0` gives uniform detuning. Feedforward attaches `M` registers
/// `c{j}_{l}` to every bond, register `l` being driven in window `l`. The
/// default partition is the half chain with its interior bond registers.
pub fn build_lattice_scenario(p: &ScenarioParams) -> Result<LatticeScenario> {
    p.validate()?;
    let n = p.sites;
    if n < 2 || n % 2 != 0 {
        return Err(Error::Parameter(format!("lattice size {n} must be even and at least 2")));
    }
    if !matches!(p.variant, Variant::Conditional | Variant::Feedforward | Variant::Dephasing) {
        return Err(Error::Parameter(format!("variant {} has no lattice form", p.variant)));
    }
    let m = if p.variant == Variant::Feedforward { p.registers } else { 0 };
    let quadratures = 2 * (n + n * m);
    if quadratures > MAX_QUADRATURES {
        return Err(Error::Parameter(format!(
            "lattice needs {quadratures} quadratures, limit is {MAX_QUADRATURES}"
        )));
    }
    let sites: Vec<String> = (1..=n).map(|s| format!("a{s}")).collect();
    let registers_by_bond: Vec<Vec<String>> = (1..=n)
        .map(|j| (1..=m).map(|l| format!("c{j}_{l}")).collect())
        .collect();
    let mut labels = sites.clone();
    labels.extend(registers_by_bond.iter().flatten().cloned());
    let layout = ModeLayout::new(labels)?;
    let dim = layout.dim();

    let mut h0 = QuadraticHamiltonian::zero(dim);
    for (k, s) in sites.iter().enumerate() {
        let w = if (k + 1) % 2 == 0 { p.omega + p.delta_omega } else { p.delta_omega - p.omega };
        h0.add_mode_frequency(layout.x(s)?, w);
    }
    let bonds: Vec<DVector<f64>> = (0..n)
        .map(|j| (unit(dim, 2 * j) + unit(dim, 2 * ((j + 1) % n))) / 2f64.sqrt())
        .collect();
    let g = p.gamma;
    let mut schedule = Schedule::default();
    let mode = match p.variant {
        Variant::Conditional => {
            let mons = bonds
                .iter()
                .map(|b| MonitoredQuadrature::new(b.clone(), g))
                .collect::<Result<Vec<_>>>()?;
            schedule.push(p.t_final, assemble_generators(&h0, &[], &mons)?);
            EvolutionMode::Conditional
        }
        Variant::Dephasing => {
            let jumps = bonds
                .iter()
                .map(|b| LinearJump::hermitian(b, g))
                .collect::<Result<Vec<_>>>()?;
            schedule.push(p.t_final, assemble_generators(&h0, &jumps, &[])?);
            EvolutionMode::Unconditional
        }
        _ => {
            let window = p.t_final / m as f64;
            for l in 0..m {
                let mut h = h0.clone();
                let mut jumps = Vec::with_capacity(n);
                for (j, b) in bonds.iter().enumerate() {
                    let y = unit(dim, layout.x(&registers_by_bond[j][l])?);
                    h.add_coupling(b, &y, g * p.eta);
                    jumps.push(LinearJump::complex(&(b * g.sqrt()), &(&y * (-p.eta * g.sqrt())))?);
                }
                schedule.push(window, assemble_generators(&h, &jumps, &[])?);
            }
            EvolutionMode::Unconditional
        }
    };
    let side_a = cut_side_a(&sites, &registers_by_bond, n / 2, &layout);
    let partition = Partition::new(&layout, &side_a)?;
    let registers = registers_by_bond.iter().flatten().cloned().collect();
    Ok(LatticeScenario {
        scenario: Scenario {
            initial: GaussianState::vacuum(layout),
            schedule,
            mode,
            partition,
            system: sites.clone(),
            registers,
        },
        sites,
        registers_by_bond,
    })
}

/// First `j` sites plus the registers of bonds lying wholly inside them.
/// Registers on the bond crossing the cut, and on the wrap-around bond, go
/// to the other side.
fn cut_side_a(
    sites: &[String],
    registers_by_bond: &[Vec<String>],
    j: usize,
    layout: &ModeLayout,
) -> Vec<String> {
    let mut side: Vec<String> = sites[..j].to_vec();
    for (b, regs) in registers_by_bond.iter().enumerate() {
        if b + 1 < j {
            side.extend(regs.iter().filter(|r| layout.contains(r)).cloned());
        }
    }
    side
}

/// Log-negativity across every cut `j = 1..n−1` of an ordered chain.
pub fn page_curve(
    s: &GaussianState,
    sites: &[String],
    registers_by_bond: &[Vec<String>],
) -> Result<Vec<f64>> {
    let n = sites.len();
    if n < 2 {
        return Err(Error::Parameter("page curve needs at least two sites".into()));
    }
    (1..n)
        .into_par_iter()
        .map(|j| {
            let side_a = cut_side_a(sites, registers_by_bond, j, &s.layout);
            let p = Partition::new(&s.layout, &side_a)?;
            log_negativity(s, &p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::IntegratorConfig;

    #[test]
    fn bond_spectra() {
        let s = bond_spectrum(4).unwrap();
        let expect = [2.0, 1.0, 1.0, 0.0];
        for (l, e) in s.lambdas.iter().zip(expect) {
            assert!((l - e).abs() < 1e-12);
        }
        let s2 = bond_spectrum(2).unwrap();
        assert!((s2.lambdas[0] - 2.0).abs() < 1e-12 && s2.lambdas[1].abs() < 1e-12);
        assert!(bond_spectrum(1).is_err());
    }

    #[test]
    fn bond_spectrum_matches_fourier_formula_and_reconstructs() {
        for n in [4, 6, 8, 12] {
            let s = bond_spectrum(n).unwrap();
            let mut f: Vec<f64> = (0..n)
                .map(|k| 1.0 + (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
                .collect();
            f.sort_by(|a, b| b.total_cmp(a));
            for (l, e) in s.lambdas.iter().zip(&f) {
                assert!((l - e).abs() < 1e-10);
            }
            let o = &s.basis;
            assert!((o * o.transpose() - DMatrix::identity(n, n)).amax() < 1e-10);
            assert!((s.reconstruct() - BondSpectrum::bond_matrix(n)).amax() < 1e-10);
            assert_eq!(s.lambdas.iter().filter(|&&l| l.abs() < 1e-10).count(), 1);
        }
    }

    #[test]
    fn product_state_page_curve_is_flat_zero() {
        let p = ScenarioParams { sites: 6, registers: 2, variant: Variant::Feedforward, ..Default::default() };
        let l = build_lattice_scenario(&p).unwrap();
        let curve = page_curve(&l.scenario.initial, &l.sites, &l.registers_by_bond).unwrap();
        assert_eq!(curve.len(), 5);
        assert!(curve.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn guards() {
        let base = ScenarioParams { sites: 8, registers: 10, variant: Variant::Feedforward, ..Default::default() };
        assert!(build_lattice_scenario(&ScenarioParams { sites: 7, ..base.clone() }).is_err());
        assert!(build_lattice_scenario(&ScenarioParams { registers: 0, ..base.clone() }).is_err());
        assert!(build_lattice_scenario(&ScenarioParams { registers: 1000, ..base.clone() }).is_err());
        let dis = ScenarioParams { variant: Variant::DissipativeOnly, ..base };
        assert!(build_lattice_scenario(&dis).is_err());
    }

    #[test]
    fn register_ordering_and_cut_assignment() {
        let p = ScenarioParams { sites: 4, registers: 2, variant: Variant::Feedforward, ..Default::default() };
        let l = build_lattice_scenario(&p).unwrap();
        let labels = l.scenario.layout().labels();
        // Bond-major register order after the sites.
        assert_eq!(labels[4], "c1_1");
        assert_eq!(labels[5], "c1_2");
        assert_eq!(labels[6], "c2_1");
        // Half chain: sites a1, a2 and the registers of bond 1 (a1–a2).
        assert_eq!(l.scenario.partition.side_a, ["a1", "a2", "c1_1", "c1_2"]);
    }

    #[test]
    fn conditional_page_curve_is_symmetric_dome() {
        let p = ScenarioParams { sites: 8, t_final: 20.0, ..Default::default() };
        let l = build_lattice_scenario(&p).unwrap();
        let cfg = IntegratorConfig::default().with_max_step(1e-2);
        let fin = l.scenario.run(&cfg).unwrap().pop().unwrap().state;
        let c = page_curve(&fin, &l.sites, &l.registers_by_bond).unwrap();
        for j in 0..c.len() {
            assert!((c[j] - c[c.len() - 1 - j]).abs() < 1e-6);
        }
        let max = c.iter().cloned().fold(0.0, f64::max);
        assert_eq!(max, c[3]);
        assert!(c[0] < c[1] && c[1] < c[2] && c[2] < c[3]);
    }
}
