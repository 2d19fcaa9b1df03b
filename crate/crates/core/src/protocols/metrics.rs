use crate::error::{Error, Result};

/// `|dE/dt|` bound of the stopping rule, in units of γ.
pub const STOP_THRESHOLD: f64 = 1e-3;
/// Window over which the bound must hold, in units of 1/γ.
pub const STOP_WINDOW: f64 = 1.0;
/// Latest stopping time, in units of 1/γ.
pub const STOP_CAP: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct InefficiencyReport {
    /// `(E_ps − E_det)/E_ps` per point, `0` where both vanish.
    pub pointwise: Vec<f64>,
    /// Root-mean-square of `E_ps − E_det` over all points.
    pub rms: f64,
}

pub fn inefficiency_metrics(e_ps: &[f64], e_det: &[f64]) -> Result<InefficiencyReport> {
    if e_ps.len() != e_det.len() {
        return Err(Error::Series(format!("{} vs {} points", e_ps.len(), e_det.len())));
    }
    if e_ps.is_empty() {
        return Err(Error::Series("empty series".into()));
    }
    let pointwise = e_ps
        .iter()
        .zip(e_det)
        .map(|(&p, &d)| if p == 0.0 && d == 0.0 { 0.0 } else { (p - d) / p })
        .collect();
    let ms = e_ps.iter().zip(e_det).map(|(p, d)| (p - d).powi(2)).sum::<f64>() / e_ps.len() as f64;
    Ok(InefficiencyReport { pointwise, rms: ms.sqrt() })
}

/// Least-squares slope of `values` against `ln t`.
pub fn log_slope(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::Series("need at least two aligned points".into()));
    }
    if times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Series("log fit needs positive times".into()));
    }
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, values.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(values).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

fn derivative(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len();
    (0..n)
        .map(|i| {
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (values[hi] - values[lo]) / (times[hi] - times[lo])
        })
        .collect()
}

/// First sampled time `t` with `|dE/dt| < threshold` at every sample in
/// `[t − window, t]`, using finite differences on the sample grid.
pub fn stabilization_time(times: &[f64], values: &[f64], threshold: f64, window: f64) -> Option<f64> {
    if times.len() != values.len() || times.len() < 2 {
        return None;
    }
    let d = derivative(times, values);
    let t0 = times[0];
    let tol = 1e-9 * window.max(1.0);
    (0..times.len()).find_map(|i| {
        let t = times[i];
        if t < t0 + window - tol {
            return None;
        }
        let ok = (0..=i)
            .filter(|&j| times[j] >= t - window - tol)
            .all(|j| d[j].abs() < threshold);
        ok.then_some(t)
    })
}

/// Stabilization time under the default rule, capped at [`STOP_CAP`].
pub fn stopping_time(times: &[f64], values: &[f64]) -> f64 {
    stabilization_time(times, values, STOP_THRESHOLD, STOP_WINDOW)
        .unwrap_or(STOP_CAP)
        .min(STOP_CAP)
}
