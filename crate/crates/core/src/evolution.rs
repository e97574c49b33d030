//! Exact propagation `U(t) = exp(A t) U0`, an RK4 oracle, energies and the
//! pointwise exponential bound.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{
    classify, decay_function, dissipation_diagonal, energy_weights, generator_entries, ModelParams, Regime,
    StateVector, C64,
};
use crate::spectral::DEFECTIVE_COND;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorMethod {
    Eigen,
    ScalingSquaring,
}

/// `exp(A(xi) t)` for a fixed frequency, reusable across times.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub xi: f64,
    pub method: PropagatorMethod,
    /// Condition number of the eigenvector basis (infinite if it could not be formed).
    pub eigvec_cond: f64,
    a: DMatrix<C64>,
    values: Vec<C64>,
    v: DMatrix<C64>,
    v_inv: DMatrix<C64>,
}

impl Propagator {
    pub fn new(params: &ModelParams, xi: f64) -> Result<Self> {
        params.validate()?;
        if !xi.is_finite() {
            return Err(Error::Usage(format!("frequency must be finite, got {xi}")));
        }
        Ok(Self::from_matrix(xi, generator_entries(params, xi)))
    }

    pub(crate) fn from_matrix(xi: f64, a: DMatrix<C64>) -> Self {
        let n = a.nrows();
        if let Some(eig) = linalg::eigen(&a) {
            let cond = linalg::condition_number(&eig.vectors).unwrap_or(f64::INFINITY);
            if cond < DEFECTIVE_COND {
                if let Some(v_inv) = eig.vectors.clone().try_inverse() {
                    return Propagator {
                        xi,
                        method: PropagatorMethod::Eigen,
                        eigvec_cond: cond,
                        a,
                        values: eig.values,
                        v: eig.vectors,
                        v_inv,
                    };
                }
            }
            return Self::fallback(xi, a, cond);
        }
        let _ = n;
        Self::fallback(xi, a, f64::INFINITY)
    }

    fn fallback(xi: f64, a: DMatrix<C64>, cond: f64) -> Self {
        Propagator {
            xi,
            method: PropagatorMethod::ScalingSquaring,
            eigvec_cond: cond,
            a,
            values: vec![],
            v: DMatrix::zeros(0, 0),
            v_inv: DMatrix::zeros(0, 0),
        }
    }

    pub fn generator(&self) -> &DMatrix<C64> {
        &self.a
    }

    /// Eigenvalues, available when the eigen route was taken.
    pub fn eigenvalues(&self) -> Option<&[C64]> {
        (self.method == PropagatorMethod::Eigen).then_some(self.values.as_slice())
    }

    pub fn matrix(&self, t: f64) -> DMatrix<C64> {
        let n = self.a.nrows();
        if t == 0.0 {
            return DMatrix::identity(n, n);
        }
        match self.method {
            PropagatorMethod::Eigen => {
                let mut vd = self.v.clone();
                for (k, lam) in self.values.iter().enumerate() {
                    vd.column_mut(k).scale_mut_c((lam * t).exp());
                }
                vd * &self.v_inv
            }
            PropagatorMethod::ScalingSquaring => linalg::expm(&(&self.a * C64::new(t, 0.0))),
        }
    }

    pub fn apply(&self, u0: &DVector<C64>, t: f64) -> DVector<C64> {
        if t == 0.0 {
            return u0.clone();
        }
        match self.method {
            PropagatorMethod::Eigen => {
                let mut c = &self.v_inv * u0;
                for (k, lam) in self.values.iter().enumerate() {
                    c[k] *= (lam * t).exp();
                }
                &self.v * c
            }
            PropagatorMethod::ScalingSquaring => self.matrix(t) * u0,
        }
    }

    /// `||exp(A t)||_2`.
    pub fn norm(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 1.0;
        }
        linalg::spectral_norm_fast(&self.matrix(t))
    }

    /// Spread of the imaginary parts of the spectrum; sets the beat frequency of `||exp(A t)||`.
    pub fn frequency_spread(&self) -> f64 {
        let values = match self.method {
            PropagatorMethod::Eigen => self.values.clone(),
            PropagatorMethod::ScalingSquaring => linalg::eigenvalues(&self.a).unwrap_or_default(),
        };
        if values.is_empty() {
            return linalg::spectral_norm(&self.a).unwrap_or(0.0) * 2.0;
        }
        let hi = values.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
        let lo = values.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

trait ScaleC {
    fn scale_mut_c(&mut self, s: C64);
}

impl<S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>> ScaleC
    for nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S>
{
    fn scale_mut_c(&mut self, s: C64) {
        for z in self.iter_mut() {
            *z *= s;
        }
    }
}

fn check_dim(params: &ModelParams, state: &StateVector) -> Result<()> {
    if state.dim() != params.dim() {
        return Err(Error::Usage(format!(
            "state has dimension {}, the {:?} law needs {}",
            state.dim(),
            params.law,
            params.dim()
        )));
    }
    Ok(())
}

pub fn propagate(params: &ModelParams, xi: f64, u0: &StateVector, t: f64) -> Result<StateVector> {
    check_dim(params, u0)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Usage(format!("time must be finite and nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(u0.clone());
    }
    let p = Propagator::new(params, xi)?;
    Ok(StateVector(p.apply(&u0.0, t)))
}

/// Largest step `rk_oracle` accepts for this frequency.
pub fn rk_max_step(params: &ModelParams, xi: f64) -> f64 {
    let a = generator_entries(params, xi);
    0.1 / (1.0 + linalg::spectral_norm(&a).unwrap_or(f64::INFINITY))
}

/// Classical RK4 on `U_t = A(xi) U`, as an independent check of [`propagate`].
pub fn rk_oracle(params: &ModelParams, xi: f64, u0: &StateVector, t: f64, step: f64) -> Result<StateVector> {
    params.validate()?;
    check_dim(params, u0)?;
    rk4_matrix(&generator_entries(params, xi), &u0.0, t, step).map(StateVector)
}

/// RK4 for an arbitrary matrix.
pub fn rk4_matrix(a: &DMatrix<C64>, u0: &DVector<C64>, t: f64, step: f64) -> Result<DVector<C64>> {
    let norm = linalg::spectral_norm(a).unwrap_or(f64::INFINITY);
    let max_step = 0.1 / (1.0 + norm);
    if !(step > 0.0) || step > max_step {
        return Err(Error::Usage(format!("step {step} outside (0, {max_step}]")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Usage(format!("time must be finite and nonnegative, got {t}")));
    }
    let n = (t / step).ceil() as usize;
    if n == 0 {
        return Ok(u0.clone());
    }
    let h = C64::new(t / n as f64, 0.0);
    let half = h * 0.5;
    let mut u = u0.clone();
    for _ in 0..n {
        let k1 = a * &u;
        let k2 = a * (&u + &k1 * half);
        let k3 = a * (&u + &k2 * half);
        let k4 = a * (&u + &k3 * h);
        u += (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * (h / 6.0);
    }
    Ok(u)
}

/// `E = (1/2) sum w_k |U_k|^2`.
pub fn energy(params: &ModelParams, state: &StateVector) -> Result<f64> {
    check_dim(params, state)?;
    Ok(0.5 * linalg::weighted_norm_sq(&energy_weights(params), &state.0))
}

/// `dE/dt = Re(U^H W A U)`, from the generator.
pub fn energy_rate(params: &ModelParams, xi: f64, state: &StateVector) -> Result<f64> {
    check_dim(params, state)?;
    let a = generator_entries(params, xi);
    Ok(energy_rate_with(&energy_weights(params), &a, &state.0))
}

pub(crate) fn energy_rate_with(w: &[f64], a: &DMatrix<C64>, u: &DVector<C64>) -> f64 {
    let au = a * u;
    u.iter().zip(au.iter()).zip(w).map(|((ui, aui), wi)| wi * (ui.conj() * aui).re).sum()
}

/// `-k4 xi^2 |eta|^2` (Fourier) or `-k5 |q|^2` (Cattaneo).
pub fn dissipation_rate(params: &ModelParams, xi: f64, state: &StateVector) -> f64 {
    let d = dissipation_diagonal(params, xi);
    -0.5 * linalg::weighted_norm_sq(&d, &state.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub xi: f64,
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub energies: Vec<f64>,
    pub method: PropagatorMethod,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::Usage("times must be finite and nonnegative".into()));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Usage("times must be strictly increasing".into()));
    }
    Ok(())
}

pub fn trajectory(params: &ModelParams, xi: f64, u0: &StateVector, times: &[f64]) -> Result<Trajectory> {
    check_dim(params, u0)?;
    check_times(times)?;
    let p = Propagator::new(params, xi)?;
    let w = energy_weights(params);
    let states: Vec<StateVector> = times.iter().map(|&t| StateVector(p.apply(&u0.0, t))).collect();
    let energies = states.iter().map(|s| 0.5 * linalg::weighted_norm_sq(&w, &s.0)).collect();
    Ok(Trajectory { xi, times: times.to_vec(), states, energies, method: p.method })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationResidual {
    /// `max |dE/dt - dissipation|` over the grid.
    pub worst_abs: f64,
    /// `max |dE/dt - dissipation| / (1 + E)`.
    pub worst_scaled: f64,
}

pub fn dissipation_residual(
    params: &ModelParams,
    xi: f64,
    u0: &StateVector,
    t_grid: &[f64],
) -> Result<DissipationResidual> {
    if t_grid.len() < 3 {
        return Err(Error::Usage("time grid needs at least 3 points".into()));
    }
    let traj = trajectory(params, xi, u0, t_grid)?;
    let a = generator_entries(params, xi);
    let w = energy_weights(params);
    let mut out = DissipationResidual { worst_abs: 0.0, worst_scaled: 0.0 };
    for (s, e) in traj.states.iter().zip(&traj.energies) {
        let r = (energy_rate_with(&w, &a, &s.0) - dissipation_rate(params, xi, s)).abs();
        out.worst_abs = out.worst_abs.max(r);
        out.worst_scaled = out.worst_scaled.max(r / (1.0 + e));
    }
    Ok(out)
}

/// Time samples on `[0, t_max]` fine enough to follow the beats of `||exp(A t)||`,
/// merged with the caller's grid.
pub fn resolved_times(p: &Propagator, t_grid: &[f64], refine: f64) -> Vec<f64> {
    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    let mut h = t_max / 200.0;
    let spread = p.frequency_spread();
    if spread > 0.0 {
        h = h.min(0.5 / spread);
    }
    h /= refine;
    let mut times: Vec<f64> = t_grid.to_vec();
    if t_max > 0.0 && h > 0.0 {
        let n = (t_max / h).ceil() as usize;
        times.extend((0..=n).map(|k| t_max * k as f64 / n as f64));
    }
    times.push(0.0);
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckReport {
    pub c_fit: f64,
    pub ctilde_fit: f64,
    /// `max(||exp(A t)||^2 e^{c f t} / ctilde - 1, 0)` over the verification grid.
    pub worst_violation: f64,
    pub worst_xi: f64,
    pub worst_t: f64,
    /// Frequencies where the eigenbasis was too ill-conditioned and scaling-and-squaring was used.
    pub fallback_xi: Vec<f64>,
    pub defective_threshold: f64,
    pub fit_samples: usize,
    pub verify_samples: usize,
}

/// Fits `|U(xi,t)|^2 <= ctilde exp(-c f(xi) t) |U0|^2`: `c` from the spectral
/// abscissa on the grid, `ctilde` from the peak of `||exp(A t)||^2 e^{c f t}`,
/// then verified on the grid plus midpoints at doubled time resolution.
pub fn pointwise_bound_check(params: &ModelParams, xi_grid: &[f64], t_grid: &[f64]) -> Result<BoundCheckReport> {
    params.validate()?;
    if classify(params).predicted_regime == Regime::NonDecaying {
        return Err(Error::Regime(
            "no pointwise exponential bound: transversal coupling with k2 = k3 does not decay".into(),
        ));
    }
    if xi_grid.is_empty() || t_grid.is_empty() {
        return Err(Error::Usage("grids must be nonempty".into()));
    }
    check_times(t_grid)?;
    if xi_grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Usage("frequencies must be finite".into()));
    }

    let props: Vec<(Propagator, f64)> = xi_grid
        .par_iter()
        .map(|&xi| Ok((Propagator::new(params, xi)?, decay_function(params, xi)?)))
        .collect::<Result<_>>()?;

    let mut c_fit = f64::INFINITY;
    for (p, f) in &props {
        if *f <= 0.0 {
            continue;
        }
        let sigma = crate::spectral::abscissa_unchecked(params, p.xi)?;
        c_fit = c_fit.min(-2.0 * sigma / f);
    }
    if !(c_fit > 0.0) || !c_fit.is_finite() {
        return Err(Error::Verification(format!("fitted decay constant {c_fit} is not positive")));
    }

    let peak = |p: &Propagator, f: f64, refine: f64| -> (f64, f64, usize) {
        let times = resolved_times(p, t_grid, refine);
        let mut best = (0.0, 0.0);
        for &t in &times {
            let v = p.norm(t).powi(2) * (c_fit * f * t).exp();
            if !(v <= best.0) {
                best = (v, t);
            }
        }
        (best.0, best.1, times.len())
    };

    let fit: Vec<(f64, f64, usize)> = props.par_iter().map(|(p, f)| peak(p, *f, 1.0)).collect();
    let ctilde_fit = fit.iter().map(|x| x.0).fold(0.0, f64::max);
    let fit_samples = fit.iter().map(|x| x.2).sum();
    if !ctilde_fit.is_finite() || !(ctilde_fit >= 1.0) {
        return Err(Error::Verification(format!("fitted constant {ctilde_fit} is not finite and >= 1")));
    }

    // grid points plus midpoints, with halved time steps
    let mut verify_xi: Vec<f64> = xi_grid.to_vec();
    let mut sorted = xi_grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    for w in sorted.windows(2) {
        let mid = if w[0] > 0.0 { (w[0] * w[1]).sqrt() } else { 0.5 * (w[0] + w[1]) };
        verify_xi.push(mid);
    }
    let verify: Vec<(f64, f64, f64, usize, Option<f64>)> = verify_xi
        .par_iter()
        .map(|&xi| {
            let p = Propagator::new(params, xi)?;
            let f = decay_function(params, xi)?;
            let (v, t, n) = peak(&p, f, 2.0);
            let fallback = (p.method == PropagatorMethod::ScalingSquaring).then_some(xi);
            Ok((v, xi, t, n, fallback))
        })
        .collect::<Result<_>>()?;

    let mut report = BoundCheckReport {
        c_fit,
        ctilde_fit,
        worst_violation: 0.0,
        worst_xi: f64::NAN,
        worst_t: f64::NAN,
        fallback_xi: verify.iter().filter_map(|x| x.4).collect(),
        defective_threshold: DEFECTIVE_COND,
        fit_samples,
        verify_samples: verify.iter().map(|x| x.3).sum(),
    };
    let mut worst = f64::NEG_INFINITY;
    for (v, xi, t, _, _) in &verify {
        let r = v / ctilde_fit - 1.0;
        if r > worst {
            worst = r;
            report.worst_xi = *xi;
            report.worst_t = *t;
        }
    }
    report.worst_violation = worst.max(0.0);
    Ok(report)
}
