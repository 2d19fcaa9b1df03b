use nalgebra::{DMatrix, DVector};

use super::generators::GeneratorSet;
use crate::error::{Error, Result};
use crate::gaussian::{symmetrize_matrix, GaussianState, PHYSICALITY_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    /// Largest RK4 step, in units of 1/γ.
    pub max_step: f64,
    /// Euler–Maruyama step for stochastic means.
    pub sde_step: f64,
    /// Times at which [`run_schedule`] records snapshots. Empty means final
    /// state only.
    pub sample_times: Vec<f64>,
    /// Check `Σ + iΩ ⪰ 0` at the end of every evolve call.
    pub check_physicality: bool,
    /// Tolerance of that check, relative to `max(1, max |Σ_ij|)`.
    pub physicality_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            max_step: 1e-3,
            sde_step: 1e-4,
            sample_times: vec![],
            check_physicality: true,
            physicality_tol: PHYSICALITY_TOL,
        }
    }
}

impl IntegratorConfig {
    pub fn with_samples(mut self, times: Vec<f64>) -> Self {
        self.sample_times = times;
        self
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.max_step > 0.0) || !(self.sde_step > 0.0) {
            return Err(Error::Parameter("integrator steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolutionMode {
    /// Riccati equation with measurement backaction.
    Conditional,
    /// Lyapunov equation; monitors are averaged over.
    Unconditional,
}

/// Scratch buffers for one RK4 integration.
struct Stepper {
    prod: DMatrix<f64>,
    k: [DMatrix<f64>; 4],
    tmp: DMatrix<f64>,
    w: DVector<f64>,
    mk: [DVector<f64>; 4],
    mtmp: DVector<f64>,
}

impl Stepper {
    fn new(dim: usize) -> Self {
        let z = || DMatrix::zeros(dim, dim);
        let zv = || DVector::zeros(dim);
        Self {
            prod: z(),
            k: [z(), z(), z(), z()],
            tmp: z(),
            w: zv(),
            mk: [zv(), zv(), zv(), zv()],
            mtmp: zv(),
        }
    }
}

fn cov_rhs(
    g: &GeneratorSet,
    backaction: bool,
    sigma: &DMatrix<f64>,
    prod: &mut DMatrix<f64>,
    w: &mut DVector<f64>,
    out: &mut DMatrix<f64>,
) {
    let n = sigma.nrows();
    g.a_sparse.mul_into(sigma, prod);
    let (ps, ds, os) = (prod.as_slice(), g.d.as_slice(), out.as_mut_slice());
    for j in 0..n {
        let col = j * n;
        for i in 0..n {
            os[col + i] = ps[col + i] + ps[i * n + j] + ds[col + i];
        }
    }
    if backaction {
        for m in &g.monitors {
            if m.rate == 0.0 {
                continue;
            }
            sigma.mul_to(&m.v, w);
            let c = 2.0 * m.rate;
            let (ws, os) = (w.as_slice(), out.as_mut_slice());
            for j in 0..n {
                let wj = c * ws[j];
                if wj == 0.0 {
                    continue;
                }
                for (o, wi) in os[j * n..(j + 1) * n].iter_mut().zip(ws) {
                    *o -= wi * wj;
                }
            }
        }
    }
}

fn cov_step(g: &GeneratorSet, backaction: bool, h: f64, sigma: &mut DMatrix<f64>, st: &mut Stepper) {
    let Stepper { prod, k, tmp, w, .. } = st;
    let [k1, k2, k3, k4] = k;
    cov_rhs(g, backaction, sigma, prod, w, k1);
    tmp.copy_from(sigma);
    axpy(tmp, 0.5 * h, k1);
    cov_rhs(g, backaction, tmp, prod, w, k2);
    tmp.copy_from(sigma);
    axpy(tmp, 0.5 * h, k2);
    cov_rhs(g, backaction, tmp, prod, w, k3);
    tmp.copy_from(sigma);
    axpy(tmp, h, k3);
    cov_rhs(g, backaction, tmp, prod, w, k4);
    axpy(sigma, h / 6.0, k1);
    axpy(sigma, h / 3.0, k2);
    axpy(sigma, h / 3.0, k3);
    axpy(sigma, h / 6.0, k4);
    symmetrize_matrix(sigma);
}

fn mean_rhs(g: &GeneratorSet, m: &DVector<f64>, out: &mut DVector<f64>) {
    g.a_sparse.mul_vec_into(m, out);
    *out += &g.drive;
}

fn mean_step(g: &GeneratorSet, h: f64, m: &mut DVector<f64>, st: &mut Stepper) {
    let Stepper { mk, mtmp, .. } = st;
    let [k1, k2, k3, k4] = mk;
    mean_rhs(g, m, k1);
    mtmp.copy_from(m);
    axpy(mtmp, 0.5 * h, k1);
    mean_rhs(g, mtmp, k2);
    mtmp.copy_from(m);
    axpy(mtmp, 0.5 * h, k2);
    mean_rhs(g, mtmp, k3);
    mtmp.copy_from(m);
    axpy(mtmp, h, k3);
    mean_rhs(g, mtmp, k4);
    axpy(m, h / 6.0, k1);
    axpy(m, h / 3.0, k2);
    axpy(m, h / 3.0, k3);
    axpy(m, h / 6.0, k4);
}

/// `y += a·x` over the raw storage of equally shaped matrices or vectors.
fn axpy<R: nalgebra::Dim, C: nalgebra::Dim>(
    y: &mut nalgebra::OMatrix<f64, R, C>,
    a: f64,
    x: &nalgebra::OMatrix<f64, R, C>,
) where
    nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<R, C>,
{
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += a * xi;
    }
}

/// Repeated RK4 steps of the covariance equation with reusable buffers.
pub(crate) struct CovStepper<'a> {
    g: &'a GeneratorSet,
    backaction: bool,
    st: Stepper,
}

impl<'a> CovStepper<'a> {
    pub fn new(g: &'a GeneratorSet, mode: EvolutionMode) -> Self {
        Self { g, backaction: mode == EvolutionMode::Conditional, st: Stepper::new(g.dim()) }
    }

    pub fn step(&mut self, sigma: &mut DMatrix<f64>, h: f64) {
        cov_step(self.g, self.backaction, h, sigma, &mut self.st);
    }
}

pub(crate) fn step_count(duration: f64, max_step: f64) -> usize {
    ((duration / max_step) - 1e-9).ceil().max(1.0) as usize
}

/// Advances the covariance, and for unconditional runs the mean, by
/// `duration` in equal RK4 steps no longer than `cfg.max_step`.
fn evolve(
    s: &GaussianState,
    g: &GeneratorSet,
    duration: f64,
    cfg: &IntegratorConfig,
    mode: EvolutionMode,
) -> Result<GaussianState> {
    cfg.check()?;
    if g.dim() != s.layout.dim() {
        return Err(Error::Dimension(format!(
            "generators act on {} quadratures, state has {}",
            g.dim(),
            s.layout.dim()
        )));
    }
    if !(duration >= 0.0) {
        return Err(Error::Parameter(format!("negative duration {duration}")));
    }
    let mut out = s.clone();
    if duration == 0.0 {
        return Ok(out);
    }
    let conditional = mode == EvolutionMode::Conditional;
    let n = step_count(duration, cfg.max_step);
    let h = duration / n as f64;
    let mut st = Stepper::new(g.dim());
    for _ in 0..n {
        cov_step(g, conditional, h, &mut out.cov, &mut st);
        if !conditional {
            mean_step(g, h, &mut out.mean, &mut st);
        }
    }
    if cfg.check_physicality {
        let d = out.validate()?;
        let scale = out.cov.abs().max().max(1.0);
        if !out.cov.iter().all(|v| v.is_finite()) || !d.is_physical(cfg.physicality_tol * scale) {
            return Err(Error::PhysicsViolation {
                t: duration,
                detail: format!(
                    "min eig(Σ+iΩ) = {:e}, min symplectic eigenvalue = {:e}",
                    d.min_physical_eig, d.min_symplectic
                ),
            });
        }
    }
    Ok(out)
}

/// Lyapunov evolution `dΣ/dt = AΣ + ΣAᵀ + D`, `d⟨r⟩/dt = A⟨r⟩ + drive`.
pub fn evolve_unconditional(
    s: &GaussianState,
    g: &GeneratorSet,
    duration: f64,
    cfg: &IntegratorConfig,
) -> Result<GaussianState> {
    evolve(s, g, duration, cfg, EvolutionMode::Unconditional)
}

/// Riccati evolution of the conditional covariance,
/// `dΣ/dt = AΣ + ΣAᵀ + D − Σ_k 2γ_k (Σv_k)(Σv_k)ᵀ`. Means are not touched.
pub fn evolve_conditional(
    s: &GaussianState,
    g: &GeneratorSet,
    duration: f64,
    cfg: &IntegratorConfig,
) -> Result<GaussianState> {
    evolve(s, g, duration, cfg, EvolutionMode::Conditional)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub generators: GeneratorSet,
}

/// Piecewise-constant generators applied in order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schedule {
    pub segments: Vec<Segment>,
}

impl Schedule {
    pub fn single(duration: f64, generators: GeneratorSet) -> Self {
        Self { segments: vec![Segment { duration, generators }] }
    }

    pub fn push(&mut self, duration: f64, generators: GeneratorSet) {
        self.segments.push(Segment { duration, generators });
    }

    pub fn total(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn dim(&self) -> Option<usize> {
        self.segments.first().map(|s| s.generators.dim())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub state: GaussianState,
}

/// Integrates every segment in order, recording snapshots at
/// `cfg.sample_times`. Segment boundaries are always step boundaries.
pub fn run_schedule(
    s: &GaussianState,
    sched: &Schedule,
    mode: EvolutionMode,
    cfg: &IntegratorConfig,
) -> Result<Vec<Snapshot>> {
    let dim = s.layout.dim();
    for (k, seg) in sched.segments.iter().enumerate() {
        if !(seg.duration > 0.0) {
            return Err(Error::Parameter(format!("segment {k} has duration {}", seg.duration)));
        }
        if seg.generators.dim() != dim {
            return Err(Error::Dimension(format!(
                "segment {k} acts on {} quadratures, state has {dim}",
                seg.generators.dim()
            )));
        }
    }
    let total = sched.total();
    let tol = 1e-9 * total.max(1.0);
    let mut samples = cfg.sample_times.clone();
    samples.sort_by(f64::total_cmp);
    if let Some(&t) = samples.iter().find(|&&t| t < -tol || t > total + tol) {
        return Err(Error::Parameter(format!("sample time {t} outside [0, {total}]")));
    }
    let mut out = Vec::with_capacity(samples.len().max(1));
    let mut state = s.clone();
    let mut t = 0.0;
    let mut next = 0;
    while next < samples.len() && samples[next] <= tol {
        out.push(Snapshot { t: samples[next], state: state.clone() });
        next += 1;
    }
    for seg in &sched.segments {
        let end = t + seg.duration;
        while next < samples.len() && samples[next] <= end + tol {
            let target = samples[next].min(end);
            if target > t {
                state = evolve(&state, &seg.generators, target - t, cfg, mode)
                    .map_err(|e| shift_time(e, t))?;
                t = target;
            }
            out.push(Snapshot { t: samples[next], state: state.clone() });
            next += 1;
        }
        if end > t {
            state = evolve(&state, &seg.generators, end - t, cfg, mode)
                .map_err(|e| shift_time(e, t))?;
        }
        t = end;
    }
    if samples.is_empty() {
        out.push(Snapshot { t, state });
    }
    Ok(out)
}

fn shift_time(e: Error, t0: f64) -> Error {
    match e {
        Error::PhysicsViolation { t, detail } => Error::PhysicsViolation { t: t + t0, detail },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{assemble_generators, LinearJump, MonitoredQuadrature, QuadraticHamiltonian};
    use crate::gaussian::{log_negativity, purity, ModeLayout, Partition};

    fn ab() -> GaussianState {
        GaussianState::vacuum(ModeLayout::new(["a", "b"]).unwrap())
    }

    fn x_plus() -> DVector<f64> {
        DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]) / 2f64.sqrt()
    }

    fn monitored(gamma: f64) -> GeneratorSet {
        let m = MonitoredQuadrature::new(x_plus(), gamma).unwrap();
        assemble_generators(&QuadraticHamiltonian::zero(4), &[], &[m]).unwrap()
    }

    /// x+ variance and p+ variance of the exact conditional solution.
    fn closed(t: f64) -> (f64, f64) {
        (1.0 / (1.0 + 2.0 * t), 1.0 + 2.0 * t)
    }

    fn plus_minus(cov: &DMatrix<f64>) -> DMatrix<f64> {
        let r = 0.5f64.sqrt();
        let u = DMatrix::from_row_slice(4, 4, &[
            r, 0.0, r, 0.0, //
            0.0, r, 0.0, r, //
            r, 0.0, -r, 0.0, //
            0.0, r, 0.0, -r,
        ]);
        &u * cov * u.transpose()
    }

    #[test]
    fn riccati_matches_closed_form() {
        let g = monitored(1.0);
        let s = evolve_conditional(&ab(), &g, 1.0, &IntegratorConfig::default()).unwrap();
        let pm = plus_minus(&s.cov);
        let (sx, sp) = closed(1.0);
        assert!((pm[(0, 0)] - sx).abs() < 1e-12);
        assert!((pm[(1, 1)] - sp).abs() < 1e-12);
        assert!(pm[(0, 1)].abs() < 1e-14);
        assert!((pm[(2, 2)] - 1.0).abs() < 1e-14);
        assert!((purity(&s).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn riccati_is_fourth_order() {
        let g = monitored(1.0);
        let err = |h: f64| {
            let cfg = IntegratorConfig::default().with_max_step(h);
            let s = evolve_conditional(&ab(), &g, 2.0, &cfg).unwrap();
            let pm = plus_minus(&s.cov);
            (pm[(0, 0)] - closed(2.0).0).abs()
        };
        let (e1, e2) = (err(0.05), err(0.025));
        let ratio = e1 / e2;
        assert!((14.0..18.0).contains(&ratio), "error ratio {ratio}");
    }

    #[test]
    fn zero_rate_reduces_to_unconditional() {
        let g = monitored(0.0);
        let cfg = IntegratorConfig::default();
        let c = evolve_conditional(&ab(), &g, 1.0, &cfg).unwrap();
        let u = evolve_unconditional(&ab(), &g, 1.0, &cfg).unwrap();
        assert_eq!(c.cov, u.cov);
        let zero = GeneratorSet::zero(4);
        let mut s = ab();
        s.mean[1] = 0.3;
        let z = evolve_unconditional(&s, &zero, 2.0, &cfg).unwrap();
        assert_eq!(z, s);
    }

    #[test]
    fn dephasing_entries() {
        let j = LinearJump::hermitian(&x_plus(), 1.0).unwrap();
        let g = assemble_generators(&QuadraticHamiltonian::zero(4), &[j], &[]).unwrap();
        let s = evolve_unconditional(&ab(), &g, 1.0, &IntegratorConfig::default()).unwrap();
        assert!((s.cov[(1, 1)] - 2.0).abs() < 1e-12);
        assert!((s.cov[(1, 3)] - 1.0).abs() < 1e-12);
        assert!((s.cov[(0, 0)] - 1.0).abs() < 1e-12);
        let p = Partition::new(&s.layout, &["a"]).unwrap();
        assert!(log_negativity(&s, &p).unwrap() < 1e-12);
    }

    #[test]
    fn mean_follows_linear_ode() {
        let mut h = QuadraticHamiltonian::zero(2);
        h.add_mode_frequency(0, 1.0);
        let g = assemble_generators(&h, &[], &[]).unwrap();
        let mut s = GaussianState::vacuum(ModeLayout::new(["a"]).unwrap());
        s.mean[0] = 1.0;
        let out = evolve_unconditional(&s, &g, 1.0, &IntegratorConfig::default()).unwrap();
        assert!((out.mean[0] - 1f64.cos()).abs() < 1e-12);
        assert!((out.mean[1] + 1f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn schedule_snapshots_and_boundaries() {
        let g = monitored(1.0);
        let mut sched = Schedule::default();
        sched.push(0.35, g.clone());
        sched.push(0.65, g.clone());
        let cfg = IntegratorConfig::default().with_samples(vec![0.0, 0.5, 1.0]);
        let snaps = run_schedule(&ab(), &sched, EvolutionMode::Conditional, &cfg).unwrap();
        assert_eq!(snaps.len(), 3);
        assert_eq!(snaps[0].state, ab());
        let direct = evolve_conditional(&ab(), &g, 1.0, &IntegratorConfig::default()).unwrap();
        assert!((&snaps[2].state.cov - &direct.cov).amax() < 1e-12);
        let one = run_schedule(&ab(), &Schedule::single(1.0, g.clone()), EvolutionMode::Conditional,
            &IntegratorConfig::default()).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].state.cov, direct.cov);
        let bad = IntegratorConfig::default().with_samples(vec![2.0]);
        assert!(run_schedule(&ab(), &sched, EvolutionMode::Conditional, &bad).is_err());
        let mut neg = Schedule::default();
        neg.push(0.0, g);
        assert!(run_schedule(&ab(), &neg, EvolutionMode::Conditional, &cfg).is_err());
    }

    #[test]
    fn unphysical_growth_is_reported() {
        // Negative diffusion drives the state below vacuum noise.
        let mut g = GeneratorSet::zero(2);
        g.d = -DMatrix::identity(2, 2);
        let s = GaussianState::vacuum(ModeLayout::new(["a"]).unwrap());
        let e = evolve_unconditional(&s, &g, 0.5, &IntegratorConfig::default());
        assert!(matches!(e, Err(Error::PhysicsViolation { .. })));
    }
}
