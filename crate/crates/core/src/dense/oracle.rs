use nalgebra::DMatrix;

use super::lindblad::LindbladConfig;
use super::measures::dense_log_negativity;
use super::models::{truncated_oscillators, TruncatedParams};
use super::space::{build_operator, DenseOperator, OperatorKind, Quadrature};
use super::state::DenseState;
use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::gaussian::log_negativity;
use crate::protocols::{build_two_mode_scenario, ScenarioParams, Variant};

/// Top-level Fock population above which a truncation leak is reported.
pub const LEAK_THRESHOLD: f64 = 1e-4;

/// Engine comparison at one sample time.
#[derive(Debug, Clone)]
pub struct OracleSample {
    pub t: f64,
    pub gaussian_log_negativity: f64,
    pub dense_log_negativity: f64,
    /// Largest entry of `|Σ_dense − Σ_gaussian|`.
    pub moment_error: f64,
    pub mean_error: f64,
    /// Largest highest-level population over subsystems.
    pub top_level_population: f64,
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub n_tr: usize,
    pub samples: Vec<OracleSample>,
    pub max_log_negativity_error: f64,
    pub max_moment_error: f64,
    pub max_top_level_population: f64,
    pub leak_warning: bool,
}

/// First moments and covariance `Σ_ij = ⟨{r_i, r_j}⟩ − 2⟨r_i⟩⟨r_j⟩` of a
/// state of truncated oscillators, with same-site products taken before
/// truncation.
pub fn dense_moments(s: &DenseState) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let spec = super::space::HilbertSpec::new(s.dims().to_vec())?;
    let n = spec.n_subsystems();
    let rho = s.density();
    let quad = |k: usize, q: Quadrature| -> Result<DenseOperator> {
        build_operator(&spec, &match q {
            Quadrature::X => OperatorKind::TruncatedX(k),
            Quadrature::P => OperatorKind::TruncatedP(k),
        })
    };
    let qs = [Quadrature::X, Quadrature::P];
    let mut ops = Vec::with_capacity(2 * n);
    for k in 0..n {
        for q in qs {
            ops.push((k, q, quad(k, q)?));
        }
    }
    let mean: Vec<f64> = ops.iter().map(|(_, _, o)| o.expectation(&rho).re).collect();
    let mut cov = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..2 * n {
        for j in i..2 * n {
            let (ki, qi, oi) = &ops[i];
            let (kj, qj, oj) = &ops[j];
            let sym = if ki == kj {
                let a = build_operator(&spec, &OperatorKind::QuadratureProduct(*ki, *qi, *qj))?;
                let b = build_operator(&spec, &OperatorKind::QuadratureProduct(*ki, *qj, *qi))?;
                a.expectation(&rho).re + b.expectation(&rho).re
            } else {
                2.0 * oi.compose(oj)?.expectation(&rho).re
            };
            let v = sym - 2.0 * mean[i] * mean[j];
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok((mean, cov))
}

/// Runs a two-mode scenario in both engines and compares `E_N` across the
/// scenario's default bipartition and the first two moments. The dense side
/// keeps `n_tr` Fock levels per mode.
pub fn oracle_compare(
    params: &ScenarioParams,
    n_tr: usize,
    sample_times: &[f64],
    dense_cfg: &LindbladConfig,
) -> Result<OracleReport> {
    let horizon = sample_times
        .iter()
        .copied()
        .fold(f64::NAN, f64::max);
    if !(horizon > 0.0) {
        return Err(Error::Parameter("oracle needs a positive sample time".into()));
    }
    if params.variant.has_registers() && params.registers != 1 {
        return Err(Error::Unsupported("oracle supports a single register".into()));
    }
    let mut p = params.clone();
    p.t_final = horizon;
    let scenario = build_two_mode_scenario(&p)?;
    let snaps = scenario.run(&IntegratorConfig::default().with_samples(sample_times.to_vec()))?;
    let model = truncated_oscillators(
        p.variant,
        n_tr,
        TruncatedParams { gamma: p.gamma, eta: p.eta, omega: p.omega, delta_omega: p.delta_omega },
    )?;
    let dense = model.run(sample_times, dense_cfg)?;
    let mut samples = Vec::with_capacity(dense.len());
    for (snap, (t, st)) in snaps.iter().zip(&dense) {
        let g_en = log_negativity(&snap.state, &scenario.partition)?;
        let d_en = dense_log_negativity(st, &model.side_a)?;
        let (mean, cov) = dense_moments(st)?;
        let moment_error = (&cov - &snap.state.cov).abs().max();
        let mean_error = mean
            .iter()
            .zip(snap.state.mean.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let top = st.top_level_populations().into_iter().fold(0.0, f64::max);
        samples.push(OracleSample {
            t: *t,
            gaussian_log_negativity: g_en,
            dense_log_negativity: d_en,
            moment_error,
            mean_error,
            top_level_population: top,
        });
    }
    let max_of = |f: fn(&OracleSample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    let max_log_negativity_error = max_of(|s| (s.gaussian_log_negativity - s.dense_log_negativity).abs());
    let max_moment_error = max_of(|s| s.moment_error);
    let max_top_level_population = max_of(|s| s.top_level_population);
    let leak_warning = max_top_level_population > LEAK_THRESHOLD;
    if leak_warning {
        log::warn!(
            "truncation leak: top-level population {max_top_level_population:e} exceeds {LEAK_THRESHOLD:e} at n_tr = {n_tr}"
        );
    }
    Ok(OracleReport {
        n_tr,
        samples,
        max_log_negativity_error,
        max_moment_error,
        max_top_level_population,
        leak_warning,
    })
}

/// True for the variants [`oracle_compare`] can run.
pub fn oracle_supports(variant: Variant) -> bool {
    matches!(variant, Variant::Dephasing | Variant::Feedforward | Variant::DissipativeOnly)
}
