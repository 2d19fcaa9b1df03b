use crate::config::{
    Engine, IntegratorSettings, Measure, Params, SampleTimes, ScenarioConfig, Seeds, Sweep,
};
use crate::error::HarnessError;

/// Preset names with a one-line description.
pub const PRESETS: [(&str, &str); 13] = [
    ("fig2", "conditional law, feedforward (M=1, eta=1) and recovered entanglement with purities"),
    ("fig3a", "conditional entanglement under the QMFS Hamiltonian for several detunings"),
    ("fig3b", "E_N at t_f=10 vs detuning: conditional and feedforward with M=20, eta=5"),
    ("fig3c", "lattice page curves, conditional vs feedforward, log-law and area-law regimes"),
    ("fig4", "qubit pair with a d-level register vs trajectory-averaged conditional E_N"),
    ("figS2", "entanglement inefficiency and purity vs eta, with and without recovery"),
    ("figS3", "entanglement of formation after recovery vs the conditional state"),
    ("figS4", "recovery at sharp and finite measurement resolution"),
    ("figS5", "pairing correlators of the monitored lattice, n=20, t_f=10"),
    ("figS6", "E_N at t_f=10 vs detuning for M=5,10,15,20 (RMS error vs M)"),
    ("figS7", "E_N at t_f=10 vs detuning for M=5,10,15"),
    ("figS9", "qubit register dynamics for several feedforward strengths"),
    ("figS10", "three-qudit feedforward chain for d=2..7"),
];

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|k| ((start + step * k as f64) * 1e12).round() / 1e12).collect()
}

fn base(name: &str, engine: Engine, variants: &[&str], outputs: Vec<Measure>) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        engine,
        variants: variants.iter().map(|v| v.to_string()).collect(),
        params: Params::default(),
        partition: None,
        sweep: Vec::new(),
        seeds: Seeds::default(),
        outputs,
        sample_times: SampleTimes { step: Some(0.1), values: None },
        integrator: IntegratorSettings::default(),
        stop_rule: false,
        scale: None,
    }
}

fn sweep(axis: &str, values: Vec<f64>) -> Sweep {
    Sweep { axis: axis.into(), values }
}

/// Parameter sets of the published figures. `full` selects the published
/// scale where the default is reduced.
pub fn preset(name: &str, full: bool) -> Result<ScenarioConfig, HarnessError> {
    use Measure::*;
    let two_mode_sweep = |name: &str, registers: Vec<f64>, outputs: Vec<Measure>| {
        let mut c = base(name, Engine::Gaussian, &["conditional", "feedforward"], outputs);
        c.params.omega = 1.2;
        c.params.eta = 5.0;
        c.params.t_final = 10.0;
        c.sample_times = SampleTimes { step: None, values: Some(vec![10.0]) };
        c.sweep = vec![sweep("registers", registers), sweep("delta_omega", grid(0.0, 1.5, 0.1))];
        c
    };
    let c = match name {
        "fig2" => {
            let mut c = base(name, Engine::Gaussian, &["law", "conditional", "feedforward", "recovered"], vec![
                LogNegativity,
                Purity,
            ]);
            c.params.t_final = 10.0;
            c
        }
        "fig3a" => {
            let mut c = base(name, Engine::Gaussian, &["conditional"], vec![LogNegativity]);
            c.params.omega = 1.2;
            c.params.eta = 5.0;
            c.params.t_final = 100.0;
            c.sample_times.step = Some(0.5);
            c.sweep = vec![sweep("delta_omega", vec![0.0, 0.3, 0.6, 1.2])];
            c
        }
        "fig3b" => {
            let mut c = two_mode_sweep(name, vec![20.0], vec![LogNegativity]);
            c.sweep.remove(0);
            c.params.registers = 20;
            c
        }
        "fig3c" => {
            let mut c = base(name, Engine::Gaussian, &["conditional", "feedforward"], vec![PageCurve, LogNegativity]);
            c.params.eta = 5.0;
            c.params.t_final = 50.0;
            c.stop_rule = true;
            c.sweep = vec![sweep("delta_omega", vec![0.0, 0.3])];
            if full {
                c.params.sites = 32;
                c.params.registers = 15;
                c.scale = Some("published scale: n=32, M=15".into());
            } else {
                c.params.sites = 8;
                c.params.registers = 10;
                c.scale = Some("desk scale: n=8, M=10 (published n=32, M=15 via --full)".into());
            }
            c
        }
        "fig4" => {
            let mut c = base(name, Engine::Dense, &["qubit_register", "monitored_qubits"], vec![LogNegativity]);
            c.params.t_final = 5.0;
            c.seeds = Seeds { base: 1, count: 2000 };
            c.sweep = vec![sweep("d", grid(2.0, 7.0, 1.0))];
            c.scale = Some("register dimensions d=2..7; horizon t_f=5".into());
            c
        }
        "figS2" => {
            let mut c = base(name, Engine::Gaussian, &["conditional", "feedforward", "recovered"], vec![
                Inefficiency,
                Purity,
            ]);
            c.params.t_final = 100.0;
            c.sample_times.step = Some(0.5);
            c.sweep = vec![sweep("eta", vec![0.5, 1.0, 2.0, 5.0])];
            c
        }
        "figS3" => {
            let mut c = base(name, Engine::Gaussian, &["conditional", "recovered"], vec![Eof]);
            c.params.t_final = 100.0;
            c.sample_times.step = Some(0.5);
            c
        }
        "figS4" => {
            let mut c = base(name, Engine::Gaussian, &["conditional", "recovered"], vec![Inefficiency, Purity]);
            c.params.t_final = 100.0;
            c.sample_times.step = Some(0.5);
            c.sweep = vec![sweep("mu", vec![1e-8, 1.0])];
            c
        }
        "figS5" => {
            let mut c = base(name, Engine::Gaussian, &["conditional"], vec![Pairing]);
            c.params.sites = 20;
            c.params.t_final = 10.0;
            c.sample_times = SampleTimes { step: None, values: Some(vec![10.0]) };
            c
        }
        "figS6" => two_mode_sweep(name, vec![5.0, 10.0, 15.0, 20.0], vec![LogNegativity, Inefficiency]),
        "figS7" => two_mode_sweep(name, vec![5.0, 10.0, 15.0], vec![LogNegativity]),
        "figS9" => {
            let mut c = base(name, Engine::Dense, &["qubit_register", "monitored_qubits"], vec![LogNegativity]);
            c.params.t_final = 5.0;
            c.params.d = 15;
            c.seeds = Seeds { base: 1, count: 2000 };
            c.sweep = vec![sweep("eta", vec![0.5, 1.0, 2.0, 5.0])];
            c.scale = Some("register dimension d=15; horizon t_f=5".into());
            c
        }
        "figS10" => {
            let mut c = base(name, Engine::Dense, &["qudit_chain"], vec![LogNegativity]);
            c.params.t_final = 5.0;
            c.sweep = vec![sweep("d", grid(2.0, 7.0, 1.0))];
            c.scale = Some("horizon t_f=5".into());
            c
        }
        _ => {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            return Err(HarnessError::Config(format!("unknown preset `{name}`; available: {names:?}")));
        }
    };
    c.validate()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates_and_round_trips() {
        for (name, _) in PRESETS {
            for full in [false, true] {
                let c = preset(name, full).unwrap();
                assert_eq!(c.name, name);
                let back = ScenarioConfig::from_toml(&c.to_toml()).unwrap();
                assert_eq!(back.hash(), c.hash(), "{name}");
            }
        }
        assert!(matches!(preset("fig9", false), Err(HarnessError::Config(_))));
    }

    #[test]
    fn caption_parameters() {
        let f2 = preset("fig2", false).unwrap();
        assert_eq!((f2.params.gamma, f2.params.eta, f2.params.registers, f2.params.t_final), (1.0, 1.0, 1, 10.0));
        let f3b = preset("fig3b", false).unwrap();
        assert_eq!((f3b.params.omega, f3b.params.eta, f3b.params.registers, f3b.params.t_final), (1.2, 5.0, 20, 10.0));
        assert_eq!(f3b.sweep[0].values.len(), 16);
        let s5 = preset("figS5", false).unwrap();
        assert_eq!((s5.params.sites, s5.params.t_final), (20, 10.0));
        let f3c = preset("fig3c", false).unwrap();
        assert_eq!((f3c.params.sites, f3c.params.registers), (8, 10));
        let full = preset("fig3c", true).unwrap();
        assert_eq!((full.params.sites, full.params.registers), (32, 15));
        assert_ne!(f3c.hash(), full.hash());
    }
}
