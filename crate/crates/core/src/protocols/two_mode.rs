use nalgebra::DVector;

use super::params::{ScenarioParams, Variant};
use crate::dynamics::{
    assemble_generators, run_schedule, EvolutionMode, GeneratorSet, IntegratorConfig, LinearJump,
    MonitoredQuadrature, QuadraticHamiltonian, Schedule, Snapshot,
};
use crate::error::Result;
use crate::gaussian::{GaussianState, ModeLayout, Partition};

/// A compiled scenario: initial state, schedule and bookkeeping.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub initial: GaussianState,
    pub schedule: Schedule,
    pub mode: EvolutionMode,
    /// Default bipartition.
    pub partition: Partition,
    pub system: Vec<String>,
    pub registers: Vec<String>,
}

impl Scenario {
    pub fn run(&self, cfg: &IntegratorConfig) -> Result<Vec<Snapshot>> {
        run_schedule(&self.initial, &self.schedule, self.mode, cfg)
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.initial.layout
    }
}

/// `½ ln(1 + 2γt)`.
pub fn conditional_law(gamma_t: f64) -> f64 {
    0.5 * (1.0 + 2.0 * gamma_t).ln()
}

pub(crate) fn unit(dim: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    v[i] = 1.0;
    v
}

/// Two-mode scenario with modes `a`, `b`, registers `c1..cM` where the
/// variant uses them, and the damped mode `z` for the reservoir variant.
///
/// The local Hamiltonian gives mode `a` frequency `ω + δω` and mode `b`
/// frequency `δω − ω`. Register `c_j` is driven only during window `j` of
/// length `t_f / M`.
pub fn build_two_mode_scenario(p: &ScenarioParams) -> Result<Scenario> {
    p.validate()?;
    let m = if p.variant.has_registers() { p.registers } else { 0 };
    let registers: Vec<String> = (1..=m).map(|j| format!("c{j}")).collect();
    let mut labels = vec!["a".to_string(), "b".to_string()];
    labels.extend(registers.iter().cloned());
    if p.variant == Variant::ReservoirEngineered {
        labels.push("z".into());
    }
    let layout = ModeLayout::new(labels)?;
    let dim = layout.dim();
    let mut h0 = QuadraticHamiltonian::zero(dim);
    h0.add_mode_frequency(layout.x("a")?, p.omega + p.delta_omega);
    h0.add_mode_frequency(layout.x("b")?, p.delta_omega - p.omega);
    let xp = (unit(dim, layout.x("a")?) + unit(dim, layout.x("b")?)) / 2f64.sqrt();
    let g = p.gamma;

    let mut schedule = Schedule::default();
    let mode = match p.variant {
        Variant::Conditional => {
            let mon = MonitoredQuadrature::new(xp, g)?;
            schedule.push(p.t_final, assemble_generators(&h0, &[], &[mon])?);
            EvolutionMode::Conditional
        }
        Variant::Dephasing => {
            let jump = LinearJump::hermitian(&xp, g)?;
            schedule.push(p.t_final, assemble_generators(&h0, &[jump], &[])?);
            EvolutionMode::Unconditional
        }
        _ => {
            let window = p.t_final / m as f64;
            for r in &registers {
                schedule.push(window, register_segment(p, &layout, &h0, &xp, r)?);
            }
            EvolutionMode::Unconditional
        }
    };
    let system = vec!["a".to_string(), "b".to_string()];
    let partition = Partition::new(&layout, &["a"])?;
    Ok(Scenario {
        initial: GaussianState::vacuum(layout),
        schedule,
        mode,
        partition,
        system,
        registers,
    })
}

fn register_segment(
    p: &ScenarioParams,
    layout: &ModeLayout,
    h0: &QuadraticHamiltonian,
    xp: &DVector<f64>,
    register: &str,
) -> Result<GeneratorSet> {
    let dim = layout.dim();
    let (g, eta) = (p.gamma, p.eta);
    let y = unit(dim, layout.x(register)?);
    let mut h = h0.clone();
    match p.variant {
        Variant::Feedforward => {
            h.add_coupling(xp, &y, g * eta);
            let jump = LinearJump::complex(&(xp * g.sqrt()), &(&y * (-eta * g.sqrt())))?;
            assemble_generators(&h, &[jump], &[])
        }
        Variant::DissipativeOnly => {
            let s = (2.0 * g).sqrt();
            let jump = LinearJump::complex(&(xp * s), &(&y * (-eta * s)))?;
            assemble_generators(&h, &[jump], &[])
        }
        Variant::ReservoirEngineered => {
            let xz = unit(dim, layout.x("z")?);
            let pz = unit(dim, layout.p("z")?);
            let k = (g * p.kappa / 2.0).sqrt();
            h.add_coupling(xp, &y, g * eta);
            h.add_coupling(&xz, xp, k);
            h.add_coupling(&pz, &y, -k * eta);
            let s = (p.kappa / 2.0).sqrt();
            let jump = LinearJump::complex(&(&xz * s), &(&pz * s))?;
            assemble_generators(&h, &[jump], &[])
        }
        Variant::Conditional | Variant::Dephasing => unreachable!("variant has no registers"),
    }
}
