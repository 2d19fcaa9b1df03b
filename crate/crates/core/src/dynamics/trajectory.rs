use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::generators::GeneratorSet;
use super::integrate::{step_count, CovStepper, EvolutionMode, IntegratorConfig};
use crate::error::{Error, Result};
use crate::gaussian::GaussianState;

/// One sampled measurement trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub times: Vec<f64>,
    /// Conditional means at each recorded time.
    pub means: Vec<DVector<f64>>,
    /// Integrated records `I_k(t)`, one entry per monitor.
    pub records: Vec<DVector<f64>>,
}

/// Conditional covariance path, stored as `Σ(t_i) v_k` for each step start.
struct GainPath {
    h: f64,
    steps: usize,
    gains: Vec<DMatrix<f64>>,
    record_at: Vec<usize>,
}

fn gain_path(
    s: &GaussianState,
    g: &GeneratorSet,
    duration: f64,
    cfg: &IntegratorConfig,
) -> Result<GainPath> {
    if g.dim() != s.layout.dim() {
        return Err(Error::Dimension("generators and state disagree".into()));
    }
    if !(duration > 0.0) || !(cfg.sde_step > 0.0) {
        return Err(Error::Parameter("trajectory duration and step must be positive".into()));
    }
    let steps = step_count(duration, cfg.sde_step);
    let h = duration / steps as f64;
    let k = g.monitors.len();
    let mut sigma = s.cov.clone();
    let mut stepper = CovStepper::new(g, EvolutionMode::Conditional);
    let mut gains = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut w = DMatrix::zeros(g.dim(), k);
        for (j, m) in g.monitors.iter().enumerate() {
            w.set_column(j, &(&sigma * &m.v));
        }
        gains.push(w);
        stepper.step(&mut sigma, h);
    }
    let mut record_at: Vec<usize> = if cfg.sample_times.is_empty() {
        (0..=steps).collect()
    } else {
        cfg.sample_times
            .iter()
            .map(|t| ((t / h).round().max(0.0) as usize).min(steps))
            .collect()
    };
    record_at.sort_unstable();
    record_at.dedup();
    Ok(GainPath { h, steps, gains, record_at })
}

fn integrate_means(s: &GaussianState, g: &GeneratorSet, path: &GainPath, seed: u64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = g.dim();
    let k = g.monitors.len();
    let h = path.h;
    let sq = h.sqrt();
    let rates: Vec<f64> = g.monitors.iter().map(|m| m.rate.sqrt()).collect();
    let mut r = s.mean.clone();
    let mut rec = DVector::zeros(k);
    let mut drift = DVector::zeros(dim);
    let mut out = Trajectory {
        seed,
        times: Vec::with_capacity(path.record_at.len()),
        means: Vec::with_capacity(path.record_at.len()),
        records: Vec::with_capacity(path.record_at.len()),
    };
    let mut next = 0;
    for step in 0..=path.steps {
        if next < path.record_at.len() && path.record_at[next] == step {
            out.times.push(step as f64 * h);
            out.means.push(r.clone());
            out.records.push(rec.clone());
            next += 1;
        }
        if step == path.steps {
            break;
        }
        g.a_sparse.mul_vec_into(&r, &mut drift);
        drift += &g.drive;
        let w = &path.gains[step];
        let mut noise = DVector::zeros(dim);
        for (j, m) in g.monitors.iter().enumerate() {
            let dw: f64 = StandardNormal.sample(&mut rng);
            let dw = dw * sq;
            rec[j] += 2.0 * rates[j] * m.v.dot(&r) * h + dw;
            noise.axpy(rates[j] * dw, &w.column(j), 1.0);
        }
        r.axpy(h, &drift, 1.0);
        r += noise;
    }
    out
}

/// Euler–Maruyama sample of the conditional means and measurement records,
/// `d⟨r⟩ = (A⟨r⟩ + drive)dt + Σ_k √γ_k Σv_k dW_k`,
/// `dI_k = 2√γ_k v_k·⟨r⟩ dt + dW_k`.
///
/// Records at `cfg.sample_times` (rounded to the step grid), or at every step
/// when no sample times are given.
pub fn sample_trajectory(
    s: &GaussianState,
    g: &GeneratorSet,
    duration: f64,
    seed: u64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let path = gain_path(s, g, duration, cfg)?;
    Ok(integrate_means(s, g, &path, seed))
}

/// `count` trajectories with seeds `base_seed + k`, sharing one covariance
/// path. The result is independent of the number of worker threads.
pub fn sample_ensemble(
    s: &GaussianState,
    g: &GeneratorSet,
    duration: f64,
    base_seed: u64,
    count: usize,
    cfg: &IntegratorConfig,
) -> Result<Vec<Trajectory>> {
    let path = gain_path(s, g, duration, cfg)?;
    Ok((0..count as u64)
        .into_par_iter()
        .map(|k| integrate_means(s, g, &path, base_seed.wrapping_add(k)))
        .collect())
}
