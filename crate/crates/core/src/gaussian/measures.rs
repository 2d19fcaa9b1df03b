use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::state::{symplectic_form, GaussianState, Partition};
use super::PURE_TOL;
use crate::error::{Error, Result};

/// Symplectic eigenvalues of `Σ`, ascending, one per mode.
///
/// These are the moduli of the eigenvalues of `iΩΣ`. They are obtained as the
/// singular values of the antisymmetric matrix `Σ^{1/2} Ω Σ^{1/2}`, which is
/// similar to `ΩΣ`; singular values come in equal pairs and each pair is
/// collapsed to one value.
pub fn symplectic_spectrum(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let d = cov.nrows();
    if d == 0 || d % 2 != 0 || cov.ncols() != d {
        return Err(Error::Dimension(format!("covariance is {}x{}", d, cov.ncols())));
    }
    let sym = (cov + cov.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, 1e-15, 0)
        .ok_or_else(|| Error::Eigen("covariance eigendecomposition".into()))?;
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        return Err(Error::Unphysical(format!(
            "covariance is not positive definite (eigenvalue {min:e})"
        )));
    }
    let sqrt_vals = eig.eigenvalues.map(f64::sqrt);
    let v = &eig.eigenvectors;
    let root = v * DMatrix::from_diagonal(&sqrt_vals) * v.transpose();
    let m = &root * symplectic_form(d / 2) * &root;
    let svd = m
        .try_svd(false, false, 1e-15, 0)
        .ok_or_else(|| Error::Eigen("symplectic spectrum did not converge".into()))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(f64::total_cmp);
    let nu: Vec<f64> = s.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    for p in s.chunks(2) {
        if (p[0] - p[1]).abs() > 1e-9 * p[1].max(1.0) {
            log::debug!("symplectic pair mismatch {} vs {}", p[0], p[1]);
        }
    }
    Ok(nu)
}

/// Covariance of the partial transpose with respect to `side_b`: every
/// momentum of side B changes sign.
pub fn partial_transpose(s: &GaussianState, side_b: &[String]) -> Result<DMatrix<f64>> {
    let mut cov = s.cov.clone();
    for l in side_b {
        let p = s.layout.p(l)?;
        cov.row_mut(p).neg_mut();
        cov.column_mut(p).neg_mut();
    }
    Ok(cov)
}

fn pt_spectrum(s: &GaussianState, p: &Partition) -> Result<Vec<f64>> {
    p.check(&s.layout)?;
    symplectic_spectrum(&partial_transpose(s, &p.side_b)?)
}

/// Logarithmic negativity across `p`, in nats.
pub fn log_negativity(s: &GaussianState, p: &Partition) -> Result<f64> {
    let nu = pt_spectrum(s, p)?;
    Ok(nu.iter().map(|&v| (-v.ln()).max(0.0)).sum())
}

/// `1/sqrt(det Σ)`, evaluated through a Cholesky factor.
pub fn purity(s: &GaussianState) -> Result<f64> {
    let chol = s
        .cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Unphysical("covariance has non-positive determinant".into()))?;
    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    Ok((-0.5 * log_det).exp())
}

fn mode_entropy(nu: f64) -> f64 {
    if nu <= 1.0 + 1e-12 {
        return 0.0;
    }
    let (hp, hm) = (0.5 * (nu + 1.0), 0.5 * (nu - 1.0));
    hp * hp.ln() - hm * hm.ln()
}

/// Von Neumann entropy in nats of a Gaussian state with the given symplectic
/// spectrum.
pub fn two_mode_entropy(spectrum: &[f64]) -> f64 {
    spectrum.iter().copied().map(mode_entropy).sum()
}

/// Entropy of a reduced state, with a flag telling whether it is an
/// entanglement measure (global state pure).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropy {
    pub nats: f64,
    pub global_pure: bool,
}

pub fn entanglement_entropy<S: AsRef<str>>(s: &GaussianState, side: &[S]) -> Result<Entropy> {
    let global_pure = purity(s)? > 1.0 - PURE_TOL;
    let reduced = s.reduce(side)?;
    let nats = two_mode_entropy(&symplectic_spectrum(&reduced.cov)?);
    Ok(Entropy { nats, global_pure })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementReport {
    pub log_negativity: f64,
    /// Entropy of side A; `None` unless the global state is pure.
    pub entropy: Option<f64>,
    pub purity: f64,
    pub pt_symplectic_spectrum: Vec<f64>,
}

pub fn entanglement_report(s: &GaussianState, p: &Partition) -> Result<EntanglementReport> {
    let spec = pt_spectrum(s, p)?;
    let log_negativity = spec.iter().map(|&v| (-v.ln()).max(0.0)).sum();
    let e = entanglement_entropy(s, &p.side_a)?;
    Ok(EntanglementReport {
        log_negativity,
        entropy: e.global_pure.then_some(e.nats),
        purity: purity(s)?,
        pt_symplectic_spectrum: spec,
    })
}

/// Entanglement of formation of an exchange-symmetric two-mode state.
pub fn eof_symmetric_two_mode(s: &GaussianState) -> Result<f64> {
    if s.n_modes() != 2 {
        return Err(Error::Unsupported(format!(
            "entanglement of formation needs two modes, got {}",
            s.n_modes()
        )));
    }
    let c = &s.cov;
    let scale = c.amax().max(1.0);
    let asym = [(0, 0, 2, 2), (1, 1, 3, 3), (0, 1, 2, 3), (0, 3, 2, 1)]
        .iter()
        .map(|&(i, j, k, l)| (c[(i, j)] - c[(k, l)]).abs())
        .fold(0.0, f64::max);
    if asym > 1e-6 * scale {
        return Err(Error::Unsupported(format!(
            "state is not exchange symmetric (deviation {asym:e}); general EoF is not supported"
        )));
    }
    let side_b = vec![s.layout.labels()[1].clone()];
    let nu = symplectic_spectrum(&partial_transpose(s, &side_b)?)?[0];
    if nu >= 1.0 {
        return Ok(0.0);
    }
    let cp = (nu.powf(-0.5) + nu.sqrt()).powi(2) / 4.0;
    let cm = (nu.powf(-0.5) - nu.sqrt()).powi(2) / 4.0;
    let tail = if cm > 0.0 { cm * cm.ln() } else { 0.0 };
    Ok(cp * cp.ln() - tail)
}

/// Anomalous correlators `⟨a_l a_m⟩` reconstructed from the covariance.
pub fn pairing_correlators(s: &GaussianState) -> DMatrix<Complex64> {
    let n = s.n_modes();
    let c = &s.cov;
    DMatrix::from_fn(n, n, |l, m| {
        let (xl, pl, xm, pm) = (2 * l, 2 * l + 1, 2 * m, 2 * m + 1);
        Complex64::new(c[(xl, xm)] - c[(pl, pm)], c[(xl, pm)] + c[(pl, xm)]) / 4.0
    })
}

/// Normal-ordered correlators `⟨a_l† a_m⟩` reconstructed from the covariance.
pub fn normal_ordered_correlators(s: &GaussianState) -> DMatrix<Complex64> {
    let n = s.n_modes();
    let c = &s.cov;
    DMatrix::from_fn(n, n, |l, m| {
        let (xl, pl, xm, pm) = (2 * l, 2 * l + 1, 2 * m, 2 * m + 1);
        let diag = if l == m { 0.5 } else { 0.0 };
        Complex64::new(
            (c[(xl, xm)] + c[(pl, pm)]) / 4.0 - diag,
            (c[(xl, pm)] - c[(pl, xm)]) / 4.0,
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::ModeLayout;
    use nalgebra::DVector;

    fn ab() -> ModeLayout {
        ModeLayout::new(["a", "b"]).unwrap()
    }

    /// Two-mode squeezed vacuum with squeezing `r`.
    fn tmsv(r: f64) -> GaussianState {
        let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let mut c = DMatrix::from_diagonal_element(4, 4, ch);
        c[(0, 2)] = sh;
        c[(2, 0)] = sh;
        c[(1, 3)] = -sh;
        c[(3, 1)] = -sh;
        GaussianState::new(ab(), DVector::zeros(4), c).unwrap()
    }

    /// Pure conditional state after monitoring x+ for time `t` at unit rate.
    fn conditional(t: f64) -> GaussianState {
        let (sx, sp) = (1.0 / (1.0 + 2.0 * t), 1.0 + 2.0 * t);
        let mut c = DMatrix::identity(4, 4);
        for (q, v) in [(0, sx), (1, sp)] {
            c[(q, q)] = 0.5 * (v + 1.0);
            c[(q + 2, q + 2)] = 0.5 * (v + 1.0);
            c[(q, q + 2)] = 0.5 * (v - 1.0);
            c[(q + 2, q)] = 0.5 * (v - 1.0);
        }
        GaussianState::new(ab(), DVector::zeros(4), c).unwrap()
    }

    fn a_vs_b() -> Partition {
        Partition::new(&ab(), &["a"]).unwrap()
    }

    #[test]
    fn spectrum_of_simple_states() {
        let nu = symplectic_spectrum(&DMatrix::identity(6, 6)).unwrap();
        assert_eq!(nu.len(), 3);
        assert!(nu.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let nu = symplectic_spectrum(&DMatrix::from_diagonal_element(2, 2, 3.0)).unwrap();
        assert!((nu[0] - 3.0).abs() < 1e-12);
        let nu = symplectic_spectrum(&DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 0.25]))
            .unwrap();
        assert!((nu[0] - 1.0).abs() < 1e-12);
        assert!(symplectic_spectrum(&DMatrix::identity(3, 3)).is_err());
        assert!(matches!(
            symplectic_spectrum(&DMatrix::from_diagonal_element(2, 2, -1.0)),
            Err(Error::Unphysical(_))
        ));
    }

    #[test]
    fn conditional_state_measures() {
        let s = conditional(1.0);
        let red = s.reduce(&["a"]).unwrap();
        let nu = symplectic_spectrum(&red.cov).unwrap()[0];
        assert!((nu - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        let en = log_negativity(&s, &a_vs_b()).unwrap();
        assert!((en - 0.5 * 3f64.ln()).abs() < 1e-12);
        assert!((purity(&s).unwrap() - 1.0).abs() < 1e-9);
        let d = s.validate().unwrap();
        assert!((d.min_symplectic - 1.0).abs() < 1e-9);
        // S(ν) = ((ν+1)/2) ln((ν+1)/2) − ((ν−1)/2) ln((ν−1)/2) at ν = 2/√3.
        let v = 2.0 / 3f64.sqrt();
        let expect = (v + 1.0) / 2.0 * ((v + 1.0) / 2.0).ln() - (v - 1.0) / 2.0 * ((v - 1.0) / 2.0).ln();
        let ea = entanglement_entropy(&s, &["a"]).unwrap();
        let eb = entanglement_entropy(&s, &["b"]).unwrap();
        assert!(ea.global_pure);
        assert!((ea.nats - expect).abs() < 1e-12);
        assert!((ea.nats - 0.27823).abs() < 1e-5);
        assert!((ea.nats - eb.nats).abs() < 1e-12);
        assert_eq!(log_negativity(&conditional(0.0), &a_vs_b()).unwrap(), 0.0);
    }

    #[test]
    fn mixed_state_entropy_is_flagged() {
        let s = GaussianState::new(ab(), DVector::zeros(4), DMatrix::from_diagonal_element(4, 4, 2.0))
            .unwrap();
        let e = entanglement_entropy(&s, &["a"]).unwrap();
        assert!(!e.global_pure);
        let r = entanglement_report(&s, &a_vs_b()).unwrap();
        assert_eq!(r.entropy, None);
        assert!((r.purity - 0.25).abs() < 1e-12);
    }

    #[test]
    fn purity_values() {
        let th = GaussianState::new(
            ModeLayout::new(["a"]).unwrap(),
            DVector::zeros(2),
            DMatrix::from_diagonal_element(2, 2, 3.0),
        )
        .unwrap();
        assert!((purity(&th).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(purity(&GaussianState::vacuum(ab())).unwrap(), 1.0);
        let bad = GaussianState::new(
            ModeLayout::new(["a"]).unwrap(),
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]),
        )
        .unwrap();
        assert!(matches!(purity(&bad), Err(Error::Unphysical(_))));
    }

    #[test]
    fn tmsv_closed_forms() {
        for r in [0.5, 1.0, 2.0] {
            let s = tmsv(r);
            let en = log_negativity(&s, &a_vs_b()).unwrap();
            assert!((en - 2.0 * r).abs() < 1e-8, "E_N {en} vs {}", 2.0 * r);
            let (c2, s2) = (r.cosh().powi(2), r.sinh().powi(2));
            let expect = c2 * c2.ln() - s2 * s2.ln();
            let ent = entanglement_entropy(&s, &["a"]).unwrap().nats;
            assert!((ent - expect).abs() < 1e-8);
            let eof = eof_symmetric_two_mode(&s).unwrap();
            assert!((eof - ent).abs() < 1e-8);
        }
        assert_eq!(eof_symmetric_two_mode(&GaussianState::vacuum(ab())).unwrap(), 0.0);
    }

    #[test]
    fn eof_rejects_asymmetric_and_wrong_size() {
        let mut c = DMatrix::identity(4, 4);
        c[(0, 0)] = 2.0;
        let s = GaussianState::new(ab(), DVector::zeros(4), c).unwrap();
        assert!(matches!(eof_symmetric_two_mode(&s), Err(Error::Unsupported(_))));
        let one = GaussianState::vacuum(ModeLayout::new(["a"]).unwrap());
        assert!(eof_symmetric_two_mode(&one).is_err());
    }

    #[test]
    fn pairing_of_squeezed_mode() {
        let r: f64 = 0.7;
        let s = GaussianState::new(
            ModeLayout::new(["a"]).unwrap(),
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[(-2.0 * r).exp(), 0.0, 0.0, (2.0 * r).exp()]),
        )
        .unwrap();
        let aa = pairing_correlators(&s)[(0, 0)];
        assert!((aa.re + r.sinh() * r.cosh()).abs() < 1e-12);
        assert_eq!(aa.im, 0.0);
        let nn = normal_ordered_correlators(&s)[(0, 0)];
        assert!((nn.re - r.sinh().powi(2)).abs() < 1e-12);
        let vac = GaussianState::vacuum(ab());
        assert!(pairing_correlators(&vac).iter().all(|z| z.norm() == 0.0));
        assert!(normal_ordered_correlators(&vac).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn partial_transpose_is_involution() {
        let s = tmsv(0.3);
        let b = vec!["b".to_string()];
        let once = partial_transpose(&s, &b).unwrap();
        let twice = partial_transpose(
            &GaussianState::new(ab(), DVector::zeros(4), once).unwrap(),
            &b,
        )
        .unwrap();
        assert_eq!(twice, s.cov);
    }

    /// Minimum over pure symmetric Gaussian states `γ ≤ Σ` of the one-mode
    /// entropy, by grid search over the squeezing of the collective `±` modes
    /// and a small grid of their rotation angles.
    fn eof_grid_oracle(s: &GaussianState) -> f64 {
        let rt = 0.5f64.sqrt();
        // Columns map (x+, p+, x-, p-) to (xa, pa, xb, pb).
        let u = DMatrix::from_row_slice(4, 4, &[
            rt, 0.0, rt, 0.0, //
            0.0, rt, 0.0, rt, //
            rt, 0.0, -rt, 0.0, //
            0.0, rt, 0.0, -rt,
        ]);
        let mut best = f64::INFINITY;
        let steps = 240;
        for i in 0..=steps {
            let lu = -3.0 + 6.0 * i as f64 / steps as f64;
            for j in 0..=steps {
                let lw = -3.0 + 6.0 * j as f64 / steps as f64;
                for &(tp, tm) in &[(0.0, 0.0), (0.1, 0.0), (0.0, 0.1), (-0.1, 0.05)] {
                    let mut g = DMatrix::zeros(4, 4);
                    for (blk, lv, th) in [(0, lu, tp), (2, lw, tm)] {
                        let (c, sn) = (f64::cos(th), f64::sin(th));
                        let rot = DMatrix::from_row_slice(2, 2, &[c, -sn, sn, c]);
                        let d = DMatrix::from_row_slice(2, 2, &[lv.exp(), 0.0, 0.0, (-lv).exp()]);
                        let b = &rot * d * rot.transpose();
                        g.view_mut((blk, blk), (2, 2)).copy_from(&b);
                    }
                    let gp = &u * g * u.transpose();
                    let diff = &s.cov - &gp;
                    let eig = SymmetricEigen::new(diff);
                    if eig.eigenvalues.min() < -1e-12 {
                        continue;
                    }
                    let st = GaussianState::new(ab(), DVector::zeros(4), gp).unwrap();
                    let e = entanglement_entropy(&st, &["a"]).unwrap().nats;
                    best = best.min(e);
                }
            }
        }
        best
    }

    #[test]
    fn eof_matches_grid_oracle() {
        // (x+, p+, x-, p-) variances of a mixed symmetric state.
        let (xp, pp, xm, pm) = (0.3, 4.0, 1.2, 1.5);
        let mut c = DMatrix::zeros(4, 4);
        for (q, vp, vm) in [(0, xp, xm), (1, pp, pm)] {
            c[(q, q)] = 0.5 * (vp + vm);
            c[(q + 2, q + 2)] = 0.5 * (vp + vm);
            c[(q, q + 2)] = 0.5 * (vp - vm);
            c[(q + 2, q)] = 0.5 * (vp - vm);
        }
        let s = GaussianState::new(ab(), DVector::zeros(4), c).unwrap();
        let closed = eof_symmetric_two_mode(&s).unwrap();
        let oracle = eof_grid_oracle(&s);
        assert!(closed > 0.0);
        assert!(oracle >= closed - 1e-9, "oracle {oracle} below closed form {closed}");
        assert!(oracle - closed < 2e-2, "oracle {oracle} vs closed form {closed}");
    }
}
