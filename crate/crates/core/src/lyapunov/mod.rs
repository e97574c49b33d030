//! Perturbed energies `L = lambda E + w(xi) F(xi)` as Hermitian forms, their
//! equivalence with the energy, and the decay inequality
//! `dL/dt + c f(xi) E <= 0` checked along exact trajectories.

pub mod functionals;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Propagator;
use crate::linalg;
use crate::model::{
    classify, decay_function, energy_weights, generator_entries, CouplingOrder, HeatLaw, ModelParams, Placement,
    Regime, C64,
};

pub use functionals::{Functional, Term};

/// Doublings of `lambda` tried by [`decay_inequality_check`] before giving up.
pub const MAX_DOUBLINGS: usize = 40;

/// Relative shrink applied to the fitted rate so rounding in the sampled
/// forms cannot push an exact-bound sample above zero.
const RATE_SHRINK: f64 = 1e-9;

/// Which coefficient set the correction functionals use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transcription {
    /// Coefficients exactly as printed.
    #[default]
    Printed,
    /// Printed coefficients with the slip `I1` and the Cattaneo rotation/slip
    /// `q` coefficients replaced by the values that make the cancellations exact.
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovConfig {
    pub lambda: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub lambda5: f64,
    /// Cattaneo only.
    pub lambda6: Option<f64>,
    pub epsilon0: f64,
    #[serde(default)]
    pub transcription: Transcription,
}

impl LyapunovConfig {
    pub fn with_lambda(self, lambda: f64) -> Self {
        LyapunovConfig { lambda, ..self }
    }

    pub fn with_transcription(self, transcription: Transcription) -> Self {
        LyapunovConfig { transcription, ..self }
    }
}

/// One strict inequality of a case's multiplier constraints, as `margin > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub margin: f64,
}

fn supported(params: &ModelParams) -> Result<()> {
    params.validate()?;
    if params.coupling_order == CouplingOrder::ZeroOrder {
        return Err(Error::Usage("perturbed energies are only built for first-order coupling".into()));
    }
    if classify(params).predicted_regime == Regime::NonDecaying {
        return Err(Error::Usage("no perturbed energy exists in the non-decaying regime".into()));
    }
    Ok(())
}

/// Coefficients the constraint set requires to be positive, before `epsilon0`.
fn positivity_list(params: &ModelParams, c: &LyapunovConfig) -> Vec<(&'static str, f64)> {
    let (k1, k2, k3) = (params.k1, params.k2, params.k3);
    let g = params.gamma.abs();
    let (l1, l2, l3, l4, l5) = (c.lambda1, c.lambda2, c.lambda3, c.lambda4, c.lambda5);
    match params.placement {
        Placement::Transversal => vec![
            ("k2*l1", k2 * l1),
            ("k3*l3", k3 * l3),
            ("1-l1", 1.0 - l1),
            ("l4-l3", l4 - l3),
            ("k1*l2-k1*l4-k1", k1 * l2 - k1 * l4 - k1),
            ("g*l5-l2", g * l5 - l2),
        ],
        Placement::Rotation => vec![
            ("k1-k1*l2-k1*l4", k1 - k1 * l2 - k1 * l4),
            ("k2*l1", k2 * l1),
            ("l4-l3", l4 - l3),
            ("l2", l2),
            ("k3*l3", k3 * l3),
            ("g*l5-l1-1", g * l5 - l1 - 1.0),
        ],
        Placement::Slip => vec![
            ("k3*l3", k3 * l3),
            ("l2", l2),
            ("1-l1", 1.0 - l1),
            ("k2*l1", k2 * l1),
            ("k1*l4-k1*l2-k1", k1 * l4 - k1 * l2 - k1),
            ("g*l5-l3-l4", g * l5 - l3 - l4),
        ],
    }
}

/// Every strict inequality the case imposes on `config`.
pub fn constraints(params: &ModelParams, config: &LyapunovConfig) -> Result<Vec<Constraint>> {
    supported(params)?;
    let c = config;
    let (l1, l2, l3, l4, l5) = (c.lambda1, c.lambda2, c.lambda3, c.lambda4, c.lambda5);
    let mut out: Vec<(&'static str, f64)> = vec![("lambda", c.lambda), ("l5", l5), ("epsilon0", c.epsilon0)];
    match params.placement {
        Placement::Transversal => {
            out.extend([("l1", l1), ("1-l1", 1.0 - l1), ("l2-1", l2 - 1.0), ("l3", l3), ("l4-l3", l4 - l3)]);
            out.push(("l2-1-l4", l2 - 1.0 - l4));
        }
        Placement::Rotation => {
            out.extend([("l1", l1), ("l2", l2), ("1-l2", 1.0 - l2), ("l3", l3), ("l4-l3", l4 - l3)]);
            out.push(("1-l2-l4", 1.0 - l2 - l4));
        }
        Placement::Slip => {
            out.extend([("l3", l3), ("l1", l1), ("1-l1", 1.0 - l1), ("l4-1", l4 - 1.0), ("l2", l2)]);
            out.push(("l4-1-l2", l4 - 1.0 - l2));
        }
    }
    let list = positivity_list(params, c);
    let min_bound = list.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    out.extend(list);
    out.push(("min-epsilon0", min_bound - c.epsilon0));
    match params.law {
        HeatLaw::Fourier => {}
        HeatLaw::Cattaneo => {
            let l6 = c.lambda6.unwrap_or(f64::NAN);
            out.push(("l6", l6));
            out.push(("k4*l6-g*l5", params.k4.abs() * l6 - params.gamma.abs() * l5));
        }
    }
    Ok(out.into_iter().map(|(name, margin)| Constraint { name: name.into(), margin }).collect())
}

/// Usage error naming the first violated constraint.
pub fn check_config(params: &ModelParams, config: &LyapunovConfig) -> Result<()> {
    match constraints(params, config)?.into_iter().find(|c| c.margin.is_nan() || c.margin <= 0.0) {
        Some(c) => Err(Error::Usage(format!("multiplier constraint {} violated (margin {})", c.name, c.margin))),
        None => Ok(()),
    }
}

/// Interval midpoints for every multiplier, `lambda = 1`, and `epsilon0` half
/// its admissible bound.
pub fn default_multipliers(params: &ModelParams) -> Result<LyapunovConfig> {
    supported(params)?;
    let g = params.gamma.abs();
    let (l1, l2, l3, l4, l5) = match params.placement {
        Placement::Transversal => (0.5, 3.0, 0.5, 1.0, 2.0 * 3.0 / g),
        Placement::Rotation => (1.0, 0.5, 0.125, 0.25, 2.0 * (1.0 + 1.0) / g),
        Placement::Slip => (0.5, 1.0, 1.0, 3.0, 2.0 * (1.0 + 3.0) / g),
    };
    let lambda6 = match params.law {
        HeatLaw::Fourier => None,
        HeatLaw::Cattaneo => Some(2.0 * g * l5 / params.k4.abs()),
    };
    let mut cfg = LyapunovConfig {
        lambda: 1.0,
        lambda1: l1,
        lambda2: l2,
        lambda3: l3,
        lambda4: l4,
        lambda5: l5,
        lambda6,
        epsilon0: 1.0,
        transcription: Transcription::Printed,
    };
    let min_bound = positivity_list(params, &cfg).iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    cfg.epsilon0 = 0.5 * min_bound;
    check_config(params, &cfg)?;
    Ok(cfg)
}

/// `L(xi, t) = U^H q U`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub xi: f64,
    pub q: DMatrix<C64>,
}

impl QuadraticForm {
    pub fn value(&self, u: &DVector<C64>) -> f64 {
        linalg::quadratic_form(&self.q, u)
    }

    /// `max |q - q^H|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = &self.q - self.q.adjoint();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn half_weights(params: &ModelParams) -> Vec<f64> {
    energy_weights(params).into_iter().map(|w| 0.5 * w).collect()
}

/// Weighted correction `w(xi) F(xi)` as a Hermitian matrix.
fn correction(params: &ModelParams, config: &LyapunovConfig, xi: f64) -> DMatrix<C64> {
    let f = functionals::build(params, config, xi);
    linalg::hermitian_part(&f.hermitian(params.dim())) * C64::new(f.weight, 0.0)
}

fn assemble_unchecked(params: &ModelParams, config: &LyapunovConfig, xi: f64) -> QuadraticForm {
    let mut q = correction(params, config, xi);
    for (k, w) in half_weights(params).into_iter().enumerate() {
        q[(k, k)] += C64::new(config.lambda * w, 0.0);
    }
    QuadraticForm { xi, q: linalg::hermitian_part(&q) }
}

pub fn assemble_quadratic_form(params: &ModelParams, config: &LyapunovConfig, xi: f64) -> Result<QuadraticForm> {
    check_config(params, config)?;
    Ok(assemble_unchecked(params, config, xi))
}

/// `max |mu|` over the grid for the pencil `w F - mu (1/2) W`, so that
/// `|L - lambda E| <= bound * E`.
pub fn correction_bound(params: &ModelParams, config: &LyapunovConfig, xi_grid: &[f64]) -> Result<f64> {
    check_config(params, config)?;
    let hw = half_weights(params);
    Ok(xi_grid
        .par_iter()
        .map(|&xi| {
            let mu = linalg::generalized_hermitian_eigenvalues(&correction(params, config, xi), &hw);
            mu.first().unwrap().abs().max(mu.last().unwrap().abs())
        })
        .reduce(|| 0.0, f64::max))
}

fn rayleigh_range(params: &ModelParams, config: &LyapunovConfig, xi_grid: &[f64]) -> (f64, f64) {
    let hw = half_weights(params);
    xi_grid
        .par_iter()
        .map(|&xi| {
            let mu = linalg::generalized_hermitian_eigenvalues(&assemble_unchecked(params, config, xi).q, &hw);
            (mu[0], *mu.last().unwrap())
        })
        .reduce(|| (f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)))
}

/// `(c3, c4)` with `c3 E <= L <= c4 E` on the grid.
pub fn equivalence_constants(params: &ModelParams, config: &LyapunovConfig, xi_grid: &[f64]) -> Result<(f64, f64)> {
    check_config(params, config)?;
    if xi_grid.is_empty() {
        return Err(Error::Usage("empty frequency grid".into()));
    }
    let (c3, c4) = rayleigh_range(params, config, xi_grid);
    if !(c3 > 0.0) {
        return Err(Error::Verification(format!("lambda = {} too small: c3 = {c3}", config.lambda)));
    }
    Ok((c3, c4))
}

/// Hermitian `N` with `dL/dt = U^H N U`.
pub fn rate_matrix(params: &ModelParams, form: &QuadraticForm) -> DMatrix<C64> {
    let a = generator_entries(params, form.xi);
    linalg::hermitian_part(&(&form.q * &a + a.adjoint() * &form.q))
}

/// Largest `c` with `N + c f (1/2) W <= 0`, or `None` when `f = 0` and `N <= 0`
/// fails.
fn pointwise_rate(params: &ModelParams, n: &DMatrix<C64>, f: f64) -> Option<f64> {
    let hw = half_weights(params);
    let mu = linalg::generalized_hermitian_eigenvalues(&(-n), &hw);
    if f > 0.0 {
        Some(mu[0] / f)
    } else {
        let scale = n.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (mu[0] >= -1e-12 * scale.max(1.0)).then_some(f64::INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCheckReport {
    pub c_fit: f64,
    /// `max (dL/dt + c_fit f E) / E` over samples; `<= 0` certifies the inequality.
    pub worst_margin: f64,
    pub lambda_used: f64,
    pub doublings: usize,
    pub c3: f64,
    pub c4: f64,
    pub worst_xi: f64,
    pub worst_t: f64,
    /// `L` never increased between consecutive samples.
    pub monotone: bool,
    /// `max L(t) / (L(0) exp(-(c_fit/c4) f t)) - 1`.
    pub integrated_excess: f64,
    pub samples: usize,
}

struct Sweep {
    worst_margin: f64,
    worst_xi: f64,
    worst_t: f64,
    monotone: bool,
    integrated_excess: f64,
    samples: usize,
}

fn random_unit_state(rng: &mut ChaCha8Rng, dim: usize) -> DVector<C64> {
    let v = DVector::from_fn(dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let n = v.norm();
    v.unscale(n)
}

struct Attempt {
    c3: f64,
    c4: f64,
    c_fit: f64,
    sweep: Option<Sweep>,
    offender: Option<(f64, String)>,
}

/// The state that maximizes `dL/dt / E` at one frequency, described by its
/// largest components.
fn worst_direction(params: &ModelParams, n: &DMatrix<C64>) -> String {
    let s: Vec<f64> = half_weights(params).iter().map(|w| 1.0 / w.sqrt()).collect();
    let dim = n.nrows();
    let scaled = DMatrix::from_fn(dim, dim, |i, j| n[(i, j)] * (s[i] * s[j]));
    let eig = nalgebra::SymmetricEigen::new(linalg::hermitian_part(&scaled));
    let top = eig.eigenvalues.iter().enumerate().fold(0, |b, (k, v)| if *v > eig.eigenvalues[b] { k } else { b });
    let mut v: Vec<(usize, C64)> = (0..dim).map(|i| (i, eig.eigenvectors[(i, top)] * s[i])).collect();
    let norm = v.iter().map(|(_, z)| z.norm_sqr()).sum::<f64>().sqrt();
    v.sort_by(|a, b| b.1.norm().total_cmp(&a.1.norm()));
    v.iter()
        .take(3)
        .map(|(i, z)| format!("{}={:.3}", crate::model::Component::ALL[*i].name(), z / norm))
        .collect::<Vec<_>>()
        .join(", ")
}

fn attempt(
    params: &ModelParams,
    cfg: &LyapunovConfig,
    xi_grid: &[f64],
    t_grid: &[f64],
    states_per_xi: usize,
    seed: u64,
) -> Result<Attempt> {
    let (c3, c4) = rayleigh_range(params, cfg, xi_grid);
    let per_xi: Vec<(f64, QuadraticForm, DMatrix<C64>, Option<f64>)> = xi_grid
        .par_iter()
        .map(|&xi| {
            let form = assemble_unchecked(params, cfg, xi);
            let n = rate_matrix(params, &form);
            let f = decay_function(params, xi)?;
            let c = pointwise_rate(params, &n, f);
            Ok((f, form, n, c))
        })
        .collect::<Result<_>>()?;
    let mut c_fit = f64::INFINITY;
    let mut offender = None;
    for (k, (_, _, n, c)) in per_xi.iter().enumerate() {
        match c {
            Some(c) if *c > 0.0 => c_fit = c_fit.min(*c),
            _ => {
                offender = Some((xi_grid[k], worst_direction(params, n)));
                c_fit = f64::NEG_INFINITY;
                break;
            }
        }
    }
    if !(c3 > 0.0) || offender.is_some() {
        return Ok(Attempt { c3, c4, c_fit, sweep: None, offender });
    }
    if !c_fit.is_finite() {
        return Err(Error::Usage("frequency grid has no point with f > 0".into()));
    }
    c_fit *= 1.0 - RATE_SHRINK;

    let w = energy_weights(params);
    let sweeps: Vec<Sweep> = xi_grid
        .par_iter()
        .zip(per_xi.par_iter())
        .enumerate()
        .map(|(k, (&xi, (f, form, n, _)))| {
            let prop = Propagator::new(params, xi)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut s = Sweep {
                worst_margin: f64::NEG_INFINITY,
                worst_xi: xi,
                worst_t: 0.0,
                monotone: true,
                integrated_excess: f64::NEG_INFINITY,
                samples: 0,
            };
            for _ in 0..states_per_xi {
                let u0 = random_unit_state(&mut rng, params.dim());
                let l0 = form.value(&u0);
                let mut prev = l0;
                for &t in t_grid {
                    let u = prop.apply(&u0, t);
                    let e = 0.5 * linalg::weighted_norm_sq(&w, &u);
                    let dl = linalg::quadratic_form(n, &u);
                    let margin = (dl + c_fit * f * e) / e;
                    if margin > s.worst_margin {
                        s.worst_margin = margin;
                        s.worst_t = t;
                    }
                    let l = form.value(&u);
                    if l > prev * (1.0 + 1e-12) + 1e-14 * l0 {
                        s.monotone = false;
                    }
                    prev = l;
                    let envelope = l0 * (-(c_fit / c4) * f * t).exp();
                    s.integrated_excess = s.integrated_excess.max(l / envelope - 1.0);
                    s.samples += 1;
                }
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let sweep = sweeps
        .into_iter()
        .reduce(|a, b| Sweep {
            monotone: a.monotone && b.monotone,
            integrated_excess: a.integrated_excess.max(b.integrated_excess),
            samples: a.samples + b.samples,
            ..if b.worst_margin > a.worst_margin { b } else { a }
        });
    Ok(Attempt { c3, c4, c_fit, sweep, offender: None })
}

/// Certifies `dL/dt + c f(xi) E <= 0` along exact trajectories from
/// `states_per_xi` random unit states per frequency. `c_fit` is the largest
/// rate valid for every state at every grid frequency; `lambda` is doubled
/// until `c3 > 0`, `c_fit > 0` and every sample satisfies the inequality.
pub fn decay_inequality_check(
    params: &ModelParams,
    config: &LyapunovConfig,
    xi_grid: &[f64],
    t_grid: &[f64],
    states_per_xi: usize,
    seed: u64,
) -> Result<DecayCheckReport> {
    check_config(params, config)?;
    if xi_grid.is_empty() || t_grid.is_empty() || states_per_xi == 0 {
        return Err(Error::Usage("empty frequency grid, time grid or state sample".into()));
    }
    let mut cfg = *config;
    let mut last = String::new();
    for doublings in 0..=MAX_DOUBLINGS {
        let a = attempt(params, &cfg, xi_grid, t_grid, states_per_xi, seed)?;
        match a.sweep {
            Some(s) if s.worst_margin <= 0.0 => {
                return Ok(DecayCheckReport {
                    c_fit: a.c_fit,
                    worst_margin: s.worst_margin,
                    lambda_used: cfg.lambda,
                    doublings,
                    c3: a.c3,
                    c4: a.c4,
                    worst_xi: s.worst_xi,
                    worst_t: s.worst_t,
                    monotone: s.monotone,
                    integrated_excess: s.integrated_excess,
                    samples: s.samples,
                })
            }
            Some(s) => {
                last = format!("margin {} at xi = {}, t = {}", s.worst_margin, s.worst_xi, s.worst_t);
            }
            None => {
                last = match a.offender {
                    Some((xi, state)) => format!("no positive rate at xi = {xi}, worst state ({state})"),
                    None => format!("c3 = {}", a.c3),
                };
            }
        }
        cfg.lambda *= 2.0;
    }
    Err(Error::Verification(format!(
        "decay inequality not certified after {MAX_DOUBLINGS} doublings (lambda = {}): {last}",
        cfg.lambda / 2.0
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{linspace, logspace};
    use approx::assert_relative_eq;

    fn fourier(placement: Placement, k2: f64, k3: f64) -> ModelParams {
        ModelParams::fourier(1.0, k2, k3, 1.0, 1.0, placement)
    }

    #[test]
    fn transversal_defaults() {
        let p = fourier(Placement::Transversal, 1.0, 2.0);
        let c = default_multipliers(&p).unwrap();
        assert_eq!((c.lambda1, c.lambda2, c.lambda3, c.lambda4, c.lambda5), (0.5, 3.0, 0.5, 1.0, 6.0));
        let want = 0.5 * [0.5, 1.0, 0.5, 0.5, 1.0, 3.0].iter().copied().fold(f64::INFINITY, f64::min);
        assert_relative_eq!(c.epsilon0, want);
        assert!(c.lambda6.is_none());
    }

    #[test]
    fn defaults_satisfy_constraints() {
        for placement in Placement::ALL {
            for (g, k4) in [(1.0, 1.0), (-2.0, 0.5), (0.3, -3.0)] {
                let p = ModelParams::cattaneo(1.0, 1.0, 2.0, k4, 1.0, g, placement);
                let c = default_multipliers(&p).unwrap();
                assert!(constraints(&p, &c).unwrap().iter().all(|c| c.margin > 0.0));
                let l6 = c.lambda6.unwrap();
                assert_relative_eq!(l6, 2.0 * (g * c.lambda5).abs() / k4.abs());
            }
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let p = fourier(Placement::Transversal, 1.0, 2.0);
        let mut c = default_multipliers(&p).unwrap();
        c.lambda4 = 2.5;
        assert!(matches!(assemble_quadratic_form(&p, &c, 1.0), Err(Error::Usage(_))));
        let z = p.with_coupling_order(CouplingOrder::ZeroOrder);
        assert!(matches!(default_multipliers(&z), Err(Error::Usage(_))));
        let nd = fourier(Placement::Transversal, 2.0, 2.0);
        assert!(matches!(default_multipliers(&nd), Err(Error::Usage(_))));
    }

    #[test]
    fn zero_frequency_form_is_scaled_energy() {
        for placement in Placement::ALL {
            let p = ModelParams::cattaneo(1.3, 1.0, 2.0, 0.7, 1.1, 0.9, placement);
            let c = default_multipliers(&p).unwrap().with_lambda(3.0);
            let q = assemble_quadratic_form(&p, &c, 0.0).unwrap();
            let w = energy_weights(&p);
            let expect = DMatrix::from_fn(p.dim(), p.dim(), |i, j| {
                C64::new(if i == j { 3.0 * 0.5 * w[i] } else { 0.0 }, 0.0)
            });
            assert_eq!(q.q, expect);
        }
    }

    #[test]
    fn forms_are_hermitian() {
        let p = fourier(Placement::Slip, 1.0, 2.0);
        let c = default_multipliers(&p).unwrap();
        for xi in logspace(1e-2, 1e2, 50) {
            assert!(assemble_quadratic_form(&p, &c, xi).unwrap().hermiticity_residual() < 1e-14);
        }
    }

    #[test]
    fn equivalence_constants_bracket_lambda() {
        let grid = logspace(1e-2, 1e2, 40);
        for placement in Placement::ALL {
            let p = fourier(placement, 1.0, 2.0);
            let c = default_multipliers(&p).unwrap();
            let big = c.with_lambda(1e6);
            let (c3, c4) = equivalence_constants(&p, &big, &grid).unwrap();
            assert_relative_eq!(c3, 1e6, max_relative = 1e-2);
            assert_relative_eq!(c4, 1e6, max_relative = 1e-2);

            let bound = correction_bound(&p, &c, &grid).unwrap();
            assert!(bound.is_finite());
            let c = c.with_lambda(2.0 * bound + 1.0);
            let (c3, c4) = equivalence_constants(&p, &c, &grid).unwrap();
            assert!(c3 > 0.0);
            assert!(c4 - c.lambda <= bound * (1.0 + 1e-12) && c.lambda - c3 <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn small_lambda_is_rejected() {
        let p = fourier(Placement::Transversal, 1.0, 2.0);
        let c = default_multipliers(&p).unwrap().with_lambda(1e-6);
        let grid = logspace(1e-1, 1e1, 20);
        assert!(matches!(equivalence_constants(&p, &c, &grid), Err(Error::Verification(_))));
    }

    #[test]
    fn transversal_inequality_certified() {
        let p = fourier(Placement::Transversal, 1.0, 2.0);
        let c = default_multipliers(&p).unwrap();
        let r = decay_inequality_check(&p, &c, &logspace(1e-2, 1e2, 12), &linspace(0.0, 10.0, 12), 3, 7).unwrap();
        assert!(r.c_fit > 0.0 && r.worst_margin <= 0.0 && r.c3 > 0.0);
        assert!(r.monotone);
        assert!(r.integrated_excess <= 1e-8);
    }

    #[test]
    fn zero_frequency_only_needs_dissipation() {
        let p = ModelParams::cattaneo(1.0, 1.0, 2.0, 1.0, 1.0, 1.0, Placement::Rotation);
        let c = default_multipliers(&p).unwrap();
        let q = assemble_quadratic_form(&p, &c, 0.0).unwrap();
        let n = rate_matrix(&p, &q);
        assert!(linalg::hermitian_eigenvalues(&n).last().unwrap() <= &1e-14);
    }
}
