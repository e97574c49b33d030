//! Eigenvalue analysis of the generator.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{classify, generator_entries, CouplingOrder, HeatLaw, ModelParams, Placement, Regime, C64};

/// Eigenvector condition numbers above this mark a (numerically) defective frequency.
pub const DEFECTIVE_COND: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub xi: f64,
    /// Sorted by imaginary part, then real part.
    pub eigenvalues: Vec<C64>,
    pub abscissa: f64,
    /// 2-norm condition number of the eigenvector matrix.
    pub eigvec_cond: f64,
}

impl SpectrumSample {
    pub fn defective(&self) -> bool {
        !(self.eigvec_cond < DEFECTIVE_COND)
    }
}

pub fn spectrum(params: &ModelParams, xi: f64) -> Result<SpectrumSample> {
    params.validate()?;
    if !xi.is_finite() {
        return Err(Error::Usage(format!("frequency must be finite, got {xi}")));
    }
    spectrum_unchecked(params, xi)
}

pub(crate) fn spectrum_unchecked(params: &ModelParams, xi: f64) -> Result<SpectrumSample> {
    let a = generator_entries(params, xi);
    let eig = linalg::eigen(&a).ok_or_else(|| Error::Numerical {
        xi,
        msg: "Schur iteration did not converge".into(),
    })?;
    let eigvec_cond = linalg::condition_number(&eig.vectors).unwrap_or(f64::INFINITY);
    let mut eigenvalues = eig.values;
    if eigenvalues.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical { xi, msg: "non-finite eigenvalue".into() });
    }
    eigenvalues.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    let abscissa = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(SpectrumSample { xi, eigenvalues, abscissa, eigvec_cond })
}

/// Spectral abscissa only; skips the eigenvector work.
pub(crate) fn abscissa_unchecked(params: &ModelParams, xi: f64) -> Result<f64> {
    let a = generator_entries(params, xi);
    let ev = linalg::eigenvalues(&a).ok_or_else(|| Error::Numerical {
        xi,
        msg: "Schur iteration did not converge".into(),
    })?;
    Ok(ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

pub fn abscissa_scan(params: &ModelParams, xi_grid: &[f64]) -> Result<Vec<SpectrumSample>> {
    params.validate()?;
    if xi_grid.is_empty() {
        return Err(Error::Usage("frequency grid is empty".into()));
    }
    if let Some(bad) = xi_grid.iter().find(|x| !x.is_finite()) {
        return Err(Error::Usage(format!("frequency must be finite, got {bad}")));
    }
    xi_grid.par_iter().map(|&xi| spectrum_unchecked(params, xi)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImaginaryEigenReport {
    pub xi: f64,
    pub found: bool,
    pub lambda: C64,
    /// Smallest singular value of `lambda I - A(xi)`.
    pub residual: f64,
}

/// The candidate purely imaginary eigenvalue of the transversal case with `k2 = k3`.
pub fn candidate_imaginary_eigenvalue(params: &ModelParams, xi: f64) -> C64 {
    if xi == 0.0 {
        C64::new(0.0, (2.0 * params.k1).sqrt())
    } else {
        C64::new(0.0, params.k2.sqrt() * xi)
    }
}

pub fn imaginary_eigen_check(params: &ModelParams, xi: f64, tol: f64) -> Result<ImaginaryEigenReport> {
    params.validate()?;
    if params.placement != Placement::Transversal {
        return Err(Error::Usage(
            "the imaginary-eigenvalue test is defined for transversal coupling only".into(),
        ));
    }
    let lambda = candidate_imaginary_eigenvalue(params, xi);
    let m = shifted(params, xi, lambda);
    let residual = linalg::singular_values(&m)
        .ok_or_else(|| Error::Numerical { xi, msg: "SVD did not converge".into() })?
        .min();
    Ok(ImaginaryEigenReport { xi, found: residual < tol, lambda, residual })
}

fn shifted(params: &ModelParams, xi: f64, lambda: C64) -> DMatrix<C64> {
    let a = generator_entries(params, xi);
    DMatrix::<C64>::identity(a.nrows(), a.ncols()) * lambda - a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicResidual {
    pub xi: f64,
    pub lambda: C64,
    /// `det(lambda I - A)` by LU.
    pub direct: C64,
    /// The closed-form polynomial for the transversal `k2 = k3` case.
    pub paper_formula: Option<C64>,
    /// `max(||A||_2, |lambda|, 1)^dim`, the natural size of the determinant.
    pub scale: f64,
    /// `|paper_formula - direct| / max(|direct|, scale * 1e-300)`, when the formula applies.
    pub relative_mismatch: Option<f64>,
}

impl CharacteristicResidual {
    pub fn scaled_direct(&self) -> f64 {
        self.direct.norm() / self.scale
    }

    /// Whether the closed form and the LU determinant agree to `rel_tol`.
    pub fn formula_agrees(&self, rel_tol: f64) -> Option<bool> {
        let f = self.paper_formula?;
        let diff = (f - self.direct).norm();
        Some(diff <= rel_tol * self.direct.norm().max(1e-12 * self.scale))
    }
}

/// `det(lambda I - A(xi))` with its scale, valid for any case.
pub fn characteristic_determinant(params: &ModelParams, xi: f64, lambda: C64) -> Result<(C64, f64)> {
    params.validate()?;
    let a = generator_entries(params, xi);
    let n = a.nrows() as i32;
    let norm = linalg::spectral_norm(&a)
        .ok_or_else(|| Error::Numerical { xi, msg: "SVD did not converge".into() })?;
    let scale = norm.max(lambda.norm()).max(1.0).powi(n);
    let m = DMatrix::<C64>::identity(a.nrows(), a.ncols()) * lambda - a;
    Ok((linalg::determinant(&m), scale))
}

/// Compares the LU determinant with the published closed form. Only the
/// transversal `k2 = k3` case has a closed form; other cases are a usage error
/// (use [`characteristic_determinant`] for those).
pub fn characteristic_residual(params: &ModelParams, xi: f64, lambda: C64) -> Result<CharacteristicResidual> {
    params.validate()?;
    let tag = classify(params);
    if params.placement != Placement::Transversal || !tag.k2_eq_k3 {
        return Err(Error::Usage(
            "closed-form determinant exists only for transversal coupling with k2 = k3".into(),
        ));
    }
    let (direct, scale) = characteristic_determinant(params, xi, lambda)?;
    let closed = closed_form_determinant(params, xi, lambda);
    let relative_mismatch = (closed - direct).norm() / direct.norm().max(scale * 1e-300);
    Ok(CharacteristicResidual {
        xi,
        lambda,
        direct,
        paper_formula: Some(closed),
        scale,
        relative_mismatch: Some(relative_mismatch),
    })
}

/// The printed closed-form determinants, transcribed as is. The zero-order
/// variant replaces `gamma^2 xi^2` by `gamma^2`.
fn closed_form_determinant(params: &ModelParams, xi: f64, l: C64) -> C64 {
    let (k1, k2, k4) = (params.k1, params.k2, params.k4);
    let i = C64::i();
    let x2 = xi * xi;
    let g2x2 = match params.coupling_order {
        CouplingOrder::FirstOrder => params.gamma * params.gamma * x2,
        CouplingOrder::ZeroOrder => params.gamma * params.gamma,
    };
    let s = l * l + k2 * x2;
    match params.law {
        HeatLaw::Fourier => {
            let h = l * (l + k4 * x2) + g2x2;
            2.0 * k1 * l * s * h + s * s * (l * h + k1 * x2 * (l + k4 * x2))
        }
        HeatLaw::Cattaneo => {
            let k5 = params.k5_or_zero();
            let bracket = i * k1 * k4 * xi.powi(3) * s
                + i * k4 * l * l * xi * (l + k1)
                + i * k2 * k4 * l * l * xi.powi(3)
                + i * k1 * k4 * l * xi;
            2.0 * k1 * l * (l + k5) * s * (l * l + g2x2)
                + l * (l + k5) * s * s * (l * l + k1 * x2 + g2x2)
                - i * k4 * xi * s * bracket
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Least-squares slope of `log(-abscissa)` against `log(xi)`.
    pub slope: f64,
    pub intercept: f64,
    /// `min(-abscissa)` over the sampled grid.
    pub min_decay_rate: f64,
    pub regime: Regime,
    pub xi: Vec<f64>,
    pub abscissa: Vec<f64>,
}

pub fn highfreq_abscissa_slope(params: &ModelParams, xi_lo: f64, xi_hi: f64, n_points: usize) -> Result<SlopeFit> {
    params.validate()?;
    let regime = classify(params).predicted_regime;
    if regime == Regime::NonDecaying {
        return Err(Error::Regime("no decay rate in the non-decaying case".into()));
    }
    if !(xi_lo >= 1.0) || !(xi_hi > xi_lo) || n_points < 2 {
        return Err(Error::Usage("need 1 <= xi_lo < xi_hi and at least 2 points".into()));
    }
    let xi = crate::grid::logspace(xi_lo, xi_hi, n_points);
    let abscissa: Vec<f64> = xi
        .par_iter()
        .map(|&x| abscissa_unchecked(params, x))
        .collect::<Result<_>>()?;
    if let Some((x, a)) = xi.iter().zip(&abscissa).find(|(_, a)| !(**a < 0.0)) {
        return Err(Error::Numerical {
            xi: *x,
            msg: format!("abscissa {a} is not negative in a decaying case"),
        });
    }
    let lx: Vec<f64> = xi.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = abscissa.iter().map(|a| (-a).ln()).collect();
    let (slope, intercept) = crate::grid::least_squares_line(&lx, &ly);
    let min_decay_rate = abscissa.iter().map(|a| -a).fold(f64::INFINITY, f64::min);
    Ok(SlopeFit { slope, intercept, min_decay_rate, regime, xi, abscissa })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spectrum_at_zero_frequency() {
        let p = ModelParams::fourier(1.0, 1.0, 1.0, 1.0, 1.0, Placement::Transversal);
        let s = spectrum(&p, 0.0).unwrap();
        assert_eq!(s.eigenvalues.len(), 7);
        let zeros = s.eigenvalues.iter().filter(|z| z.norm() < 1e-7).count();
        assert_eq!(zeros, 5);
        let r2 = 2f64.sqrt();
        assert!(s.eigenvalues.iter().any(|z| (z - C64::new(0.0, r2)).norm() < 1e-12));
        assert!(s.eigenvalues.iter().any(|z| (z - C64::new(0.0, -r2)).norm() < 1e-12));
        assert!(s.abscissa.abs() < 1e-10);
    }

    #[test]
    fn stable_case_has_negative_abscissa_at_one() {
        for placement in Placement::ALL {
            let p = ModelParams::fourier(1.0, 2.0, 3.0, 1.0, 1.0, placement);
            assert!(spectrum(&p, 1.0).unwrap().abscissa < 0.0, "{placement:?}");
        }
    }

    #[test]
    fn nondecaying_eigenvector_residual() {
        let p = ModelParams::fourier(1.0, 1.0, 1.0, 1.0, 1.0, Placement::Transversal);
        let a = generator_entries(&p, 3.0);
        let eig = linalg::eigen(&a).unwrap();
        let target = C64::new(0.0, 3.0);
        let k = (0..7)
            .min_by(|&i, &j| (eig.values[i] - target).norm().total_cmp(&(eig.values[j] - target).norm()))
            .unwrap();
        assert!((eig.values[k] - target).norm() < 1e-10);
        let v = eig.vectors.column(k).into_owned();
        let r = &a * &v - &v * target;
        assert!(r.norm() < 1e-10);
    }

    #[test]
    fn scan_preserves_order_and_zero_point() {
        let p = ModelParams::fourier(1.0, 2.0, 3.0, 1.0, 1.0, Placement::Rotation);
        let s = abscissa_scan(&p, &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(s.iter().map(|x| x.xi).collect::<Vec<_>>(), vec![1.0, 2.0, 4.0]);
        assert!(s.iter().all(|x| x.abscissa < 0.0));
        let z = abscissa_scan(&p, &[0.0]).unwrap();
        assert!(z[0].abscissa.abs() < 1e-10);
        assert!(abscissa_scan(&p, &[]).is_err());
    }

    #[test]
    fn imaginary_eigen_examples() {
        let p = ModelParams::fourier(1.0, 2.0, 2.0, 1.0, 1.0, Placement::Transversal);
        let r = imaginary_eigen_check(&p, 1.0, 1e-10).unwrap();
        assert!(r.found);
        assert_relative_eq!(r.lambda.im, 2f64.sqrt());
        let p = ModelParams::fourier(1.0, 1.0, 2.0, 1.0, 1.0, Placement::Transversal);
        assert!(!imaginary_eigen_check(&p, 1.0, 1e-8).unwrap().found);
        let p = ModelParams::fourier(2.0, 1.0, 1.0, 1.0, 1.0, Placement::Transversal);
        let r = imaginary_eigen_check(&p, 0.0, 1e-10).unwrap();
        assert!(r.found);
        assert_relative_eq!(r.lambda.im, 2.0);
        let p = ModelParams::fourier(1.0, 1.0, 1.0, 1.0, 1.0, Placement::Slip);
        assert!(matches!(imaginary_eigen_check(&p, 1.0, 1e-8), Err(Error::Usage(_))));
    }

    #[test]
    fn determinant_vanishes_at_imaginary_eigenvalue() {
        for law in [HeatLaw::Fourier, HeatLaw::Cattaneo] {
            let p = match law {
                HeatLaw::Fourier => ModelParams::fourier(1.5, 2.0, 2.0, 0.7, 1.3, Placement::Transversal),
                HeatLaw::Cattaneo => ModelParams::cattaneo(1.5, 2.0, 2.0, 0.7, 0.4, 1.3, Placement::Transversal),
            };
            for xi in [0.3, 1.0, 7.0] {
                let lam = candidate_imaginary_eigenvalue(&p, xi);
                let r = characteristic_residual(&p, xi, lam).unwrap();
                assert!(r.scaled_direct() < 1e-9, "{law:?} xi={xi}: {}", r.scaled_direct());
            }
            let lam = candidate_imaginary_eigenvalue(&p, 0.0);
            let (d, scale) = characteristic_determinant(&p, 0.0, lam).unwrap();
            assert!(d.norm() / scale < 1e-12);
        }
    }

    #[test]
    fn fourier_closed_form_matches_lu() {
        let p = ModelParams::fourier(1.0, 1.0, 1.0, 1.0, 1.0, Placement::Transversal);
        let r = characteristic_residual(&p, 1.0, C64::new(1.0, 0.0)).unwrap();
        assert_eq!(r.formula_agrees(1e-8), Some(true), "{r:?}");
        let p = ModelParams::fourier(1.7, 0.6, 0.6, 2.3, -0.8, Placement::Transversal);
        let r = characteristic_residual(&p, 2.1, C64::new(0.3, -1.1)).unwrap();
        assert_eq!(r.formula_agrees(1e-8), Some(true), "{r:?}");
    }

    #[test]
    fn closed_form_is_out_of_case_elsewhere() {
        let p = ModelParams::fourier(1.0, 1.0, 2.0, 1.0, 1.0, Placement::Transversal);
        assert!(matches!(characteristic_residual(&p, 1.0, C64::new(1.0, 0.0)), Err(Error::Usage(_))));
        assert!(characteristic_determinant(&p, 1.0, C64::new(1.0, 0.0)).is_ok());
    }

    #[test]
    fn slope_rejects_nondecaying() {
        let p = ModelParams::fourier(1.0, 1.0, 1.0, 1.0, 1.0, Placement::Transversal);
        assert!(matches!(highfreq_abscissa_slope(&p, 10.0, 100.0, 10), Err(Error::Regime(_))));
    }
}
