use std::collections::HashMap;

use ffmirror_core::dense::{
    dense_log_negativity, monitored_qubits, partial_trace, qubit_register, qudit_chain, sample_sme_ensemble,
    truncated_oscillators, von_neumann_entropy, DenseModel, DenseState, LindbladConfig, SmeConfig,
    TruncatedParams,
};
use ffmirror_core::dynamics::IntegratorConfig;
use ffmirror_core::gaussian::{
    eof_symmetric_two_mode, entanglement_entropy, log_negativity, pairing_correlators, purity, GaussianState,
    Partition,
};
use ffmirror_core::protocols::{
    build_lattice_scenario, build_two_mode_scenario, conditional_law, inefficiency_metrics, page_curve,
    recover, stopping_time, LatticeScenario, Scenario, ScenarioParams, Variant, STOP_CAP,
};
use rayon::prelude::*;

use crate::config::{Engine, IntegratorSettings, Measure, Params, ScenarioConfig};
use crate::error::HarnessError;

/// Rows of one measure, before the sweep columns and hash are attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub key_names: Vec<String>,
    pub keys: Vec<Vec<f64>>,
    pub columns: Vec<(String, Vec<f64>)>,
}

/// One output table: the header and numeric rows, without the hash column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub measure: Measure,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn describe(p: &Params) -> String {
    format!(
        "gamma={}, eta={}, registers={}, t_final={}, omega={}, delta_omega={}, sites={}, mu={}, kappa={}, d={}, n_tr={}",
        p.gamma, p.eta, p.registers, p.t_final, p.omega, p.delta_omega, p.sites, p.mu, p.kappa, p.d, p.n_tr
    )
}

fn config_err(p: &Params, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(format!("{e} [{}]", describe(p)))
}

fn runtime_err(p: &Params, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Runtime(format!("{e} [{}]", describe(p)))
}

/// Runs every sweep point in parallel and assembles one table per measure.
/// Row order follows the sweep order, so output does not depend on the
/// number of workers.
pub fn execute(cfg: &ScenarioConfig) -> Result<Vec<Table>, HarnessError> {
    cfg.validate()?;
    let points = cfg.points()?;
    let sme = if cfg.engine == Engine::Dense && cfg.variants.iter().any(|v| v == "monitored_qubits") {
        sme_cache(cfg, &points)?
    } else {
        HashMap::new()
    };
    let results: Vec<HashMap<Measure, Block>> = points
        .par_iter()
        .map(|(_, p)| match cfg.engine {
            Engine::Gaussian => gaussian_point(cfg, p),
            Engine::Dense => dense_point(cfg, p, &sme),
        })
        .collect::<Result<_, _>>()?;
    let axes: Vec<String> = cfg.sweep.iter().map(|s| s.axis.clone()).collect();
    let mut tables = Vec::new();
    for &m in &cfg.outputs {
        let first = &results[0][&m];
        let mut header = first.key_names.clone();
        header.extend(first.columns.iter().map(|(n, _)| n.clone()));
        header.extend(axes.iter().cloned());
        let mut rows = Vec::new();
        for ((axis_vals, _), res) in points.iter().zip(&results) {
            let b = &res[&m];
            for (i, k) in b.keys.iter().enumerate() {
                let mut row = k.clone();
                row.extend(b.columns.iter().map(|(_, c)| c[i]));
                row.extend(axis_vals.iter().copied());
                rows.push(row);
            }
        }
        tables.push(Table { measure: m, header, rows });
    }
    Ok(tables)
}

fn core_params(p: &Params, variant: Variant) -> ScenarioParams {
    ScenarioParams {
        gamma: p.gamma,
        eta: p.eta,
        registers: p.registers,
        t_final: p.t_final,
        omega: p.omega,
        delta_omega: p.delta_omega,
        sites: p.sites,
        mu: p.mu,
        kappa: p.kappa,
        variant,
    }
}

fn integrator(s: &IntegratorSettings, times: &[f64]) -> IntegratorConfig {
    IntegratorConfig {
        max_step: s.max_step,
        sde_step: s.sde_step,
        ..IntegratorConfig::default()
    }
    .with_samples(times.to_vec())
}

fn time_block(times: &[f64]) -> (Vec<String>, Vec<Vec<f64>>) {
    (vec!["t".into()], times.iter().map(|&t| vec![t]).collect())
}

/// Side A for a state: configured labels present in its layout, or the
/// given default.
fn partition_for(
    s: &GaussianState,
    configured: &Option<Vec<String>>,
    default: &Partition,
) -> Result<Partition, String> {
    match configured {
        None => Ok(default.clone()),
        Some(side) => {
            let present: Vec<&String> = side.iter().filter(|l| s.layout.contains(l)).collect();
            if present.is_empty() {
                return Err(format!("partition {side:?} has no mode in layout {:?}", s.layout.labels()));
            }
            Partition::new(&s.layout, &present).map_err(|e| e.to_string())
        }
    }
}

enum Built {
    TwoMode(Scenario),
    Lattice(LatticeScenario),
}

impl Built {
    fn scenario(&self) -> &Scenario {
        match self {
            Built::TwoMode(s) => s,
            Built::Lattice(l) => &l.scenario,
        }
    }
}

fn build(p: &Params, variant: Variant) -> Result<Built, HarnessError> {
    let cp = core_params(p, variant);
    if p.sites > 0 {
        build_lattice_scenario(&cp).map(Built::Lattice).map_err(|e| config_err(p, e))
    } else {
        build_two_mode_scenario(&cp).map(Built::TwoMode).map_err(|e| config_err(p, e))
    }
}

struct GaussianRun {
    states: Vec<GaussianState>,
    partition: Partition,
    built: Built,
}

fn gaussian_point(cfg: &ScenarioConfig, p0: &Params) -> Result<HashMap<Measure, Block>, HarnessError> {
    let mut p = p0.clone();
    let times = if cfg.stop_rule {
        let grid = cfg.sample_times.resolve(STOP_CAP)?;
        let probe = Params { t_final: STOP_CAP, ..p.clone() };
        let b = build(&probe, Variant::Conditional)?;
        let snaps = b
            .scenario()
            .run(&integrator(&cfg.integrator, &grid))
            .map_err(|e| runtime_err(&probe, e))?;
        let half = snaps
            .iter()
            .map(|s| log_negativity(&s.state, &b.scenario().partition))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| runtime_err(&probe, e))?;
        let t_stop = stopping_time(&grid, &half);
        p.t_final = t_stop;
        grid.into_iter().filter(|&t| t <= t_stop * (1.0 + 1e-12)).collect()
    } else {
        cfg.sample_times.resolve(p.t_final)?
    };
    let icfg = integrator(&cfg.integrator, &times);

    let run_variant = |name: &str| -> Result<Option<GaussianRun>, HarnessError> {
        if name == "law" {
            return Ok(None);
        }
        let recovered = name == "recovered";
        let variant: Variant = if recovered {
            Variant::Feedforward
        } else {
            name.parse().map_err(|e| config_err(&p, e))?
        };
        let built = build(&p, variant)?;
        let sc = built.scenario();
        let mut states: Vec<GaussianState> = sc
            .run(&icfg)
            .map_err(|e| runtime_err(&p, e))?
            .into_iter()
            .map(|s| s.state)
            .collect();
        let mut default = sc.partition.clone();
        if recovered {
            states = states
                .iter()
                .map(|s| recover(s, &sc.registers, p.mu))
                .collect::<Result<_, _>>()
                .map_err(|e| runtime_err(&p, e))?;
            default = Partition::new(&states[0].layout, &["a"]).map_err(|e| config_err(&p, e))?;
        }
        let partition = partition_for(&states[0], &cfg.partition, &default).map_err(|e| config_err(&p, e))?;
        Ok(Some(GaussianRun { states, partition, built }))
    };

    let mut runs = Vec::new();
    for v in &cfg.variants {
        runs.push((v.clone(), run_variant(v)?));
    }
    let en_series = |r: &GaussianRun| -> Result<Vec<f64>, HarnessError> {
        r.states
            .iter()
            .map(|s| log_negativity(s, &r.partition))
            .collect::<Result<_, _>>()
            .map_err(|e| runtime_err(&p, e))
    };
    let law: Vec<f64> = times.iter().map(|&t| conditional_law(p.gamma * t)).collect();

    let mut out = HashMap::new();
    for &m in &cfg.outputs {
        let block = match m {
            Measure::LogNegativity | Measure::Purity | Measure::Entropy | Measure::Eof => {
                let (key_names, keys) = time_block(&times);
                let mut columns = Vec::new();
                for (name, run) in &runs {
                    let col = match (m, run) {
                        (Measure::LogNegativity, None) => law.clone(),
                        (_, None) => continue,
                        (Measure::LogNegativity, Some(r)) => en_series(r)?,
                        (Measure::Purity, Some(r)) => {
                            r.states.iter().map(purity).collect::<Result<_, _>>().map_err(|e| runtime_err(&p, e))?
                        }
                        (Measure::Entropy, Some(r)) => r
                            .states
                            .iter()
                            .map(|s| entanglement_entropy(s, &r.partition.side_a).map(|e| e.nats))
                            .collect::<Result<_, _>>()
                            .map_err(|e| runtime_err(&p, e))?,
                        (_, Some(r)) => r
                            .states
                            .iter()
                            .map(|s| s.reduce(&["a", "b"]).and_then(|ab| eof_symmetric_two_mode(&ab)))
                            .collect::<Result<_, _>>()
                            .map_err(|e| runtime_err(&p, e))?,
                    };
                    columns.push((format!("{m}_{name}"), col));
                }
                Block { key_names, keys, columns }
            }
            Measure::Inefficiency => {
                let reference = match runs.iter().find(|(n, _)| n == "conditional") {
                    Some((_, Some(r))) => en_series(r)?,
                    _ => match run_variant("conditional")? {
                        Some(r) => en_series(&r)?,
                        None => unreachable!(),
                    },
                };
                let (key_names, keys) = time_block(&times);
                let mut columns = Vec::new();
                for (name, run) in &runs {
                    if let (Some(r), false) = (run, name == "conditional") {
                        let det = en_series(r)?;
                        let rep = inefficiency_metrics(&reference, &det).map_err(|e| runtime_err(&p, e))?;
                        columns.push((format!("{m}_{name}"), rep.pointwise));
                    }
                }
                Block { key_names, keys, columns }
            }
            Measure::PageCurve => {
                let t = *times.last().expect("non-empty times");
                let mut columns = Vec::new();
                let mut n_cuts = 0;
                for (name, run) in &runs {
                    let Some(r) = run else { continue };
                    let Built::Lattice(lat) = &r.built else { unreachable!() };
                    let curve = page_curve(r.states.last().unwrap(), &lat.sites, &lat.registers_by_bond)
                        .map_err(|e| runtime_err(&p, e))?;
                    n_cuts = curve.len();
                    columns.push((format!("{m}_{name}"), curve));
                }
                Block {
                    key_names: vec!["t".into(), "cut".into()],
                    keys: (1..=n_cuts).map(|j| vec![t, j as f64]).collect(),
                    columns,
                }
            }
            Measure::Pairing => {
                let t = *times.last().expect("non-empty times");
                let mut columns = Vec::new();
                let mut keys = Vec::new();
                for (name, run) in &runs {
                    let Some(r) = run else { continue };
                    let Built::Lattice(lat) = &r.built else { unreachable!() };
                    let sites = r.states.last().unwrap().reduce(&lat.sites).map_err(|e| runtime_err(&p, e))?;
                    let c = pairing_correlators(&sites);
                    let n = c.nrows();
                    keys = (0..n).flat_map(|l| (0..n).map(move |k| vec![t, (l + 1) as f64, (k + 1) as f64])).collect();
                    columns.push((format!("pairing_re_{name}"), c.transpose().iter().map(|z| z.re).collect()));
                    columns.push((format!("pairing_im_{name}"), c.transpose().iter().map(|z| z.im).collect()));
                }
                Block { key_names: vec!["t".into(), "l".into(), "m".into()], keys, columns }
            }
        };
        out.insert(m, block);
    }
    Ok(out)
}

fn sme_key(p: &Params, times: &[f64]) -> Vec<u64> {
    std::iter::once(p.gamma).chain(times.iter().copied()).map(f64::to_bits).collect()
}

/// Trajectory-averaged `E_N` of the monitored qubit pair, computed once per
/// distinct `(gamma, times)` across the sweep.
fn sme_cache(
    cfg: &ScenarioConfig,
    points: &[(Vec<f64>, Params)],
) -> Result<HashMap<Vec<u64>, Vec<f64>>, HarnessError> {
    let mut cache = HashMap::new();
    for (_, p) in points {
        let times = cfg.sample_times.resolve(p.t_final)?;
        let key = sme_key(p, &times);
        if cache.contains_key(&key) {
            continue;
        }
        let (psi0, problem) = monitored_qubits(p.gamma).map_err(|e| config_err(p, e))?;
        let sme_cfg = SmeConfig { dt: cfg.integrator.sme_dt, sample_times: times.clone() };
        let paths = sample_sme_ensemble(&psi0, &problem, &sme_cfg, cfg.seeds.base, cfg.seeds.count)
            .map_err(|e| runtime_err(p, e))?;
        let mut mean = vec![0.0; times.len()];
        for path in &paths {
            for (i, acc) in mean.iter_mut().enumerate() {
                *acc += dense_log_negativity(&path.state(i), &[0]).map_err(|e| runtime_err(p, e))?;
            }
        }
        for v in &mut mean {
            *v /= paths.len() as f64;
        }
        cache.insert(key, mean);
    }
    Ok(cache)
}

fn dense_model(name: &str, p: &Params) -> Result<DenseModel, HarnessError> {
    let model = match name {
        "qubit_register" => qubit_register(p.d, p.eta, p.gamma),
        "qudit_chain" => qudit_chain(p.d, p.gamma),
        _ => {
            if p.registers != 1 {
                return Err(config_err(p, "dense oscillator models carry exactly one register"));
            }
            let variant: Variant = name.parse().map_err(|e| config_err(p, e))?;
            truncated_oscillators(
                variant,
                p.n_tr,
                TruncatedParams { gamma: p.gamma, eta: p.eta, omega: p.omega, delta_omega: p.delta_omega },
            )
        }
    };
    model.map_err(|e| config_err(p, e))
}

fn dense_point(
    cfg: &ScenarioConfig,
    p: &Params,
    sme: &HashMap<Vec<u64>, Vec<f64>>,
) -> Result<HashMap<Measure, Block>, HarnessError> {
    let times = cfg.sample_times.resolve(p.t_final)?;
    let lcfg = LindbladConfig::with_dt(cfg.integrator.dense_dt);
    let mut runs: Vec<(String, Option<(Vec<usize>, Vec<DenseState>)>)> = Vec::new();
    for name in &cfg.variants {
        if name == "monitored_qubits" {
            runs.push((name.clone(), None));
            continue;
        }
        let model = dense_model(name, p)?;
        let side_a = match &cfg.partition {
            None => model.side_a.clone(),
            Some(labels) => {
                let idx: Vec<usize> =
                    (0..model.labels.len()).filter(|&k| labels.contains(&model.labels[k])).collect();
                if idx.is_empty() {
                    return Err(config_err(p, format!("partition {labels:?} has no subsystem in {:?}", model.labels)));
                }
                idx
            }
        };
        let states = model.run(&times, &lcfg).map_err(|e| runtime_err(p, e))?.into_iter().map(|(_, s)| s).collect();
        runs.push((name.clone(), Some((side_a, states))));
    }
    let mut out = HashMap::new();
    for &m in &cfg.outputs {
        let (key_names, keys) = time_block(&times);
        let mut columns = Vec::new();
        for (name, run) in &runs {
            let col: Vec<f64> = match run {
                None => sme[&sme_key(p, &times)].clone(),
                Some((side, states)) => states
                    .iter()
                    .map(|s| match m {
                        Measure::LogNegativity => dense_log_negativity(s, side),
                        Measure::Purity => Ok(s.purity()),
                        _ => partial_trace(s, side).and_then(|r| von_neumann_entropy(&r)),
                    })
                    .collect::<Result<_, _>>()
                    .map_err(|e| runtime_err(p, e))?,
            };
            columns.push((format!("{m}_{name}"), col));
        }
        out.insert(m, Block { key_names, keys, columns });
    }
    Ok(out)
}
