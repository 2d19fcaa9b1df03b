use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Gaussian,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    LogNegativity,
    Purity,
    Entropy,
    Eof,
    Pairing,
    PageCurve,
    Inefficiency,
}

impl Measure {
    pub const ALL: [Measure; 7] = [
        Measure::LogNegativity,
        Measure::Purity,
        Measure::Entropy,
        Measure::Eof,
        Measure::Pairing,
        Measure::PageCurve,
        Measure::Inefficiency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::LogNegativity => "log_negativity",
            Measure::Purity => "purity",
            Measure::Entropy => "entropy",
            Measure::Eof => "eof",
            Measure::Pairing => "pairing",
            Measure::PageCurve => "page_curve",
            Measure::Inefficiency => "inefficiency",
        }
    }

    /// Measures reported once per run at the final sample time.
    pub fn is_snapshot(self) -> bool {
        matches!(self, Measure::Pairing | Measure::PageCurve)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Physical parameters. Rates and frequencies are in units of `gamma`,
/// times in units of `1/gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub gamma: f64,
    pub eta: f64,
    /// Registers per measured operator (`M`).
    pub registers: usize,
    pub t_final: f64,
    pub omega: f64,
    pub delta_omega: f64,
    /// Lattice size `n`; zero selects the two-mode setup.
    pub sites: usize,
    pub mu: f64,
    pub kappa: f64,
    /// Register dimension for qubit and qudit models.
    pub d: usize,
    /// Fock truncation per oscillator for the dense engine.
    pub n_tr: usize,
}

impl Default for Params {
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
            d: 2,
            n_tr: 10,
        }
    }
}

pub const AXES: [&str; 11] = [
    "gamma", "eta", "registers", "t_final", "omega", "delta_omega", "sites", "mu", "kappa", "d", "n_tr",
];

impl Params {
    pub fn get(&self, axis: &str) -> Option<f64> {
        Some(match axis {
            "gamma" => self.gamma,
            "eta" => self.eta,
            "registers" => self.registers as f64,
            "t_final" => self.t_final,
            "omega" => self.omega,
            "delta_omega" => self.delta_omega,
            "sites" => self.sites as f64,
            "mu" => self.mu,
            "kappa" => self.kappa,
            "d" => self.d as f64,
            "n_tr" => self.n_tr as f64,
            _ => return None,
        })
    }

    pub fn set(&mut self, axis: &str, v: f64) -> Result<(), HarnessError> {
        let count = |v: f64| -> Result<usize, HarnessError> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(HarnessError::Config(format!("sweep axis `{axis}` needs non-negative integers, got {v}")))
            }
        };
        match axis {
            "gamma" => self.gamma = v,
            "eta" => self.eta = v,
            "registers" => self.registers = count(v)?,
            "t_final" => self.t_final = v,
            "omega" => self.omega = v,
            "delta_omega" => self.delta_omega = v,
            "sites" => self.sites = count(v)?,
            "mu" => self.mu = v,
            "kappa" => self.kappa = v,
            "d" => self.d = count(v)?,
            "n_tr" => self.n_tr = count(v)?,
            _ => return Err(HarnessError::Config(format!("unknown sweep axis `{axis}`"))),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub base: u64,
    pub count: usize,
}

/// Either a uniform grid `0, step, 2 step, ..., t_final` or explicit times.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleTimes {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl SampleTimes {
    pub fn resolve(&self, t_final: f64) -> Result<Vec<f64>, HarnessError> {
        match (self.step, &self.values) {
            (Some(step), None) => {
                if !(step > 0.0) || !step.is_finite() {
                    return Err(HarnessError::Config(format!("sample step {step} must be positive")));
                }
                let n = (t_final / step + 1e-9).floor() as usize;
                let mut ts: Vec<f64> = (0..=n).map(|k| step * k as f64).collect();
                if t_final - ts[n] > 1e-9 * t_final.max(1.0) {
                    ts.push(t_final);
                }
                Ok(ts)
            }
            (None, Some(vs)) => {
                if vs.is_empty() || vs.iter().any(|t| !(*t >= 0.0)) || vs.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(HarnessError::Config(
                        "sample_times.values must be non-empty, non-negative and strictly ascending".into(),
                    ));
                }
                if vs[vs.len() - 1] > t_final * (1.0 + 1e-12) {
                    return Err(HarnessError::Config(format!(
                        "sample time {} lies beyond t_final = {t_final}",
                        vs[vs.len() - 1]
                    )));
                }
                Ok(vs.clone())
            }
            _ => Err(HarnessError::Config("sample_times needs exactly one of `step` or `values`".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSettings {
    /// RK4 step of the covariance integrator.
    pub max_step: f64,
    /// Euler–Maruyama step for Gaussian means.
    pub sde_step: f64,
    /// RK4 step of the master-equation solver.
    pub dense_dt: f64,
    /// Euler–Maruyama step of the pure-state trajectories.
    pub sme_dt: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self { max_step: 1e-3, sde_step: 1e-4, dense_dt: 1e-3, sme_dt: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub engine: Engine,
    /// Protocol variants (Gaussian) or dense models, one column each.
    pub variants: Vec<String>,
    #[serde(default)]
    pub params: Params,
    /// Side A of the bipartition, as mode labels. Labels absent from a
    /// variant's layout are ignored for that variant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<String>>,
    /// Sweep axes; several axes form their Cartesian product.
    #[serde(default)]
    pub sweep: Vec<Sweep>,
    #[serde(default)]
    pub seeds: Seeds,
    pub outputs: Vec<Measure>,
    pub sample_times: SampleTimes,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    /// Lattice only: end each run when the conditional half-chain
    /// entanglement stabilizes.
    #[serde(default)]
    pub stop_rule: bool,
    /// Free-form note on how the run is scaled relative to the published one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
}

pub const GAUSSIAN_VARIANTS: [&str; 7] = [
    "conditional",
    "feedforward",
    "dephasing",
    "dissipative_only",
    "reservoir_engineered",
    "recovered",
    "law",
];

pub const LATTICE_VARIANTS: [&str; 3] = ["conditional", "feedforward", "dephasing"];

pub const DENSE_VARIANTS: [&str; 6] = [
    "feedforward",
    "dephasing",
    "dissipative_only",
    "qubit_register",
    "qudit_chain",
    "monitored_qubits",
];

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form, so formatting and key order in the
    /// source file do not matter.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canon))
    }

    /// Parameter sets of every sweep point, first axis outermost, with the
    /// axis values that produced them.
    pub fn points(&self) -> Result<Vec<(Vec<f64>, Params)>, HarnessError> {
        let mut out = vec![(Vec::new(), self.params.clone())];
        for s in &self.sweep {
            let mut next = Vec::with_capacity(out.len() * s.values.len());
            for (vals, p) in &out {
                for &v in &s.values {
                    let mut q = p.clone();
                    q.set(&s.axis, v)?;
                    let mut vs = vals.clone();
                    vs.push(v);
                    next.push((vs, q));
                }
            }
            out = next;
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.name.is_empty()
            || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return bad(format!("name `{}` must be non-empty and use [A-Za-z0-9_-]", self.name));
        }
        if self.variants.is_empty() {
            return bad("at least one variant is required".into());
        }
        let lattice = self.params.sites > 0 || self.sweep.iter().any(|s| s.axis == "sites");
        let allowed: &[&str] = match (self.engine, lattice) {
            (Engine::Gaussian, false) => &GAUSSIAN_VARIANTS,
            (Engine::Gaussian, true) => &LATTICE_VARIANTS,
            (Engine::Dense, _) => &DENSE_VARIANTS,
        };
        for (i, v) in self.variants.iter().enumerate() {
            if !allowed.contains(&v.as_str()) {
                return bad(format!("variant `{v}` is not available here; choose from {allowed:?}"));
            }
            if self.variants[..i].contains(v) {
                return bad(format!("variant `{v}` listed twice"));
            }
        }
        if self.outputs.is_empty() {
            return bad("at least one output measure is required".into());
        }
        for (i, m) in self.outputs.iter().enumerate() {
            if self.outputs[..i].contains(m) {
                return bad(format!("measure `{m}` listed twice"));
            }
            let ok = match (self.engine, m) {
                (Engine::Dense, Measure::LogNegativity | Measure::Purity | Measure::Entropy) => true,
                (Engine::Dense, _) => false,
                (Engine::Gaussian, Measure::Pairing | Measure::PageCurve) => lattice,
                (Engine::Gaussian, Measure::Eof) => !lattice,
                (Engine::Gaussian, _) => true,
            };
            if !ok {
                return bad(format!("measure `{m}` is not available for this setup"));
            }
        }
        if self.outputs.contains(&Measure::Inefficiency) && !self.variants.iter().any(|v| v != "conditional" && v != "law") {
            return bad("inefficiency needs a variant other than the conditional reference".into());
        }
        if self.engine == Engine::Dense
            && self.variants.iter().any(|v| v == "monitored_qubits")
            && self.outputs.iter().any(|m| *m != Measure::LogNegativity)
        {
            return bad("monitored_qubits only reports log_negativity".into());
        }
        if self.variants.iter().any(|v| v == "monitored_qubits") && self.seeds.count == 0 {
            return bad("monitored_qubits needs seeds.count > 0".into());
        }
        if self.stop_rule && !(self.engine == Engine::Gaussian && lattice) {
            return bad("stop_rule applies to Gaussian lattice runs only".into());
        }
        for (i, s) in self.sweep.iter().enumerate() {
            if !AXES.contains(&s.axis.as_str()) {
                return bad(format!("sweep axis `{}` is not a parameter; choose from {AXES:?}", s.axis));
            }
            if self.sweep[..i].iter().any(|o| o.axis == s.axis) {
                return bad(format!("sweep axis `{}` listed twice", s.axis));
            }
            if s.values.is_empty() || s.values.iter().any(|v| !v.is_finite()) {
                return bad(format!("sweep axis `{}` needs finite values", s.axis));
            }
        }
        let i = &self.integrator;
        for (name, v) in [("max_step", i.max_step), ("sde_step", i.sde_step), ("dense_dt", i.dense_dt), ("sme_dt", i.sme_dt)] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("integrator.{name} = {v} must be positive"));
            }
        }
        for (_, p) in self.points()? {
            if !self.stop_rule {
                self.sample_times.resolve(p.t_final)?;
            }
        }
        Ok(())
    }
}
