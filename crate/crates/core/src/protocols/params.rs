use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Continuous measurement of `x+`, postselected on the record.
    Conditional,
    /// Windowed measurement-free feedforward onto registers.
    Feedforward,
    /// Unconditional measurement, i.e. pure dephasing.
    Dephasing,
    /// Single jump `√(2γ)(x+ − iηy)` without the Hamiltonian part.
    DissipativeOnly,
    /// Feedforward realized through a damped auxiliary mode `z`.
    ReservoirEngineered,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Conditional,
        Variant::Feedforward,
        Variant::Dephasing,
        Variant::DissipativeOnly,
        Variant::ReservoirEngineered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Conditional => "conditional",
            Variant::Feedforward => "feedforward",
            Variant::Dephasing => "dephasing",
            Variant::DissipativeOnly => "dissipative_only",
            Variant::ReservoirEngineered => "reservoir_engineered",
        }
    }

    /// Whether the variant carries register modes.
    pub fn has_registers(self) -> bool {
        matches!(
            self,
            Variant::Feedforward | Variant::DissipativeOnly | Variant::ReservoirEngineered
        )
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown variant `{s}`")))
    }
}

/// Physical parameters of a scenario. Rates are in units of `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub gamma: f64,
    pub eta: f64,
    /// Registers per measured operator.
    pub registers: usize,
    pub t_final: f64,
    pub omega: f64,
    pub delta_omega: f64,
    /// Lattice size; unused by two-mode scenarios.
    pub sites: usize,
    pub mu: f64,
    pub kappa: f64,
    pub variant: Variant,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            eta: 1.0,
            registers: 1,
            t_final: 10.0,
            omega: 0.0,
            delta_omega: 0.0,
            sites: 0,
            mu: 1e-8,
            kappa: 100.0,
            variant: Variant::Conditional,
        }
    }
}

impl ScenarioParams {
    pub fn with_variant(&self, variant: Variant) -> Self {
        Self { variant, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.gamma, self.eta, self.t_final, self.omega, self.delta_omega, self.mu, self.kappa];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("parameters must be finite".into()));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::Parameter(format!("gamma = {} must be positive", self.gamma)));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::Parameter(format!("t_final = {} must be positive", self.t_final)));
        }
        if self.variant.has_registers() && self.registers < 1 {
            return Err(Error::Parameter("at least one register is required".into()));
        }
        if self.variant == Variant::ReservoirEngineered && !(self.kappa > 0.0) {
            return Err(Error::Parameter(format!("kappa = {} must be positive", self.kappa)));
        }
        if !(self.mu > 0.0) {
            return Err(Error::Parameter(format!("mu = {} must be positive", self.mu)));
        }
        Ok(())
    }
}
