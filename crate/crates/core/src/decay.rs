//! Physical-space Sobolev norms by Plancherel quadrature, decay envelopes,
//! exponent fits, the regularity-loss probe and the two integral lemmas.
//!
//! Fourier transforms are unitary, so `||d^j U||^2 = int xi^{2j} |U^(xi)|^2`.
//! Solutions of real data satisfy `U^(-xi) = conj U^(xi)`, so only `xi >= 0`
//! is integrated and the result doubled.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta, beta_reg};
use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{Error, Result};
use crate::evolution::Propagator;
use crate::grid::{least_squares_line, linspace, logspace};
use crate::linalg;
use crate::model::{
    classify, decay_function, energy_weights, generator_entries, Component, CouplingOrder,
    ModelParams, Placement, Regime, C64,
};
use crate::quadrature::{QuadSpec, Rule};

/// Tail fraction accepted for a user-supplied `xi_max`.
pub const TAIL_TOL: f64 = 1e-10;
/// Tail fraction targeted when `xi_max` is chosen automatically.
const AUTO_TAIL: f64 = 1e-13;
/// Panels whose integrand bound is below this fraction of the total are skipped.
const SKIP_REL: f64 = 1e-14;
/// Hard cap on propagator evaluations for one Plancherel integral.
const NODE_BUDGET: usize = 4_000_000;
/// Safety factor on the modal phase-speed bound used for sub-panelling.
const PHASE_SAFETY: f64 = 1.5;

/// Shape of `U^_0` on each selected component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProfileFamily {
    /// `a exp(-b xi^2)`.
    GaussianFreq { a: f64, b: f64 },
    /// `a` on `xi_a <= |xi| <= xi_b`, zero elsewhere.
    FreqBand { a: f64, xi_a: f64, xi_b: f64 },
    /// `a / (1 + xi^2)^m`.
    RationalTail { a: f64, m: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialProfile {
    #[serde(flatten)]
    pub family: ProfileFamily,
    pub components: Vec<Component>,
    /// Physical-space `L^1` norm, required for families without a closed form.
    #[serde(default)]
    pub l1_norm: Option<f64>,
}

impl InitialProfile {
    pub fn gaussian(a: f64, b: f64, components: &[Component]) -> Self {
        InitialProfile { family: ProfileFamily::GaussianFreq { a, b }, components: components.to_vec(), l1_norm: None }
    }

    pub fn band(a: f64, xi_a: f64, xi_b: f64, components: &[Component]) -> Self {
        InitialProfile {
            family: ProfileFamily::FreqBand { a, xi_a, xi_b },
            components: components.to_vec(),
            l1_norm: None,
        }
    }

    pub fn rational(a: f64, m: f64, components: &[Component]) -> Self {
        InitialProfile { family: ProfileFamily::RationalTail { a, m }, components: components.to_vec(), l1_norm: None }
    }

    pub fn with_l1_norm(mut self, l1: f64) -> Self {
        self.l1_norm = Some(l1);
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: String| Err(Error::Usage(m));
        let pos = |x: f64| x.is_finite() && x > 0.0;
        match self.family {
            ProfileFamily::GaussianFreq { a, b } => {
                if !a.is_finite() || a == 0.0 || !pos(b) {
                    return bad(format!("gaussian profile needs a != 0 and b > 0, got a={a}, b={b}"));
                }
            }
            ProfileFamily::FreqBand { a, xi_a, xi_b } => {
                if !a.is_finite() || a == 0.0 || !(xi_a >= 0.0 && xi_b > xi_a && xi_b.is_finite()) {
                    return bad(format!("band profile needs a != 0 and 0 <= xi_a < xi_b, got a={a}, [{xi_a}, {xi_b}]"));
                }
            }
            ProfileFamily::RationalTail { a, m } => {
                if !a.is_finite() || a == 0.0 || !(m.is_finite() && m >= 1.0) {
                    return bad(format!("rational profile needs a != 0 and m >= 1, got a={a}, m={m}"));
                }
            }
        }
        if self.components.is_empty() {
            return bad("profile selects no components".into());
        }
        for (k, c) in self.components.iter().enumerate() {
            if c.idx() >= dim {
                return bad(format!("component {} does not exist in a {dim}-dimensional state", c.name()));
            }
            if self.components[..k].contains(c) {
                return bad(format!("component {} selected twice", c.name()));
            }
        }
        if let Some(l1) = self.l1_norm {
            if !pos(l1) {
                return bad(format!("l1_norm must be positive, got {l1}"));
            }
        }
        Ok(())
    }

    fn count(&self) -> f64 {
        self.components.len() as f64
    }

    /// Common value of `U^_0` on each selected component (even in `xi`).
    pub fn amplitude(&self, xi: f64) -> f64 {
        let xi = xi.abs();
        match self.family {
            ProfileFamily::GaussianFreq { a, b } => a * (-b * xi * xi).exp(),
            ProfileFamily::FreqBand { a, xi_a, xi_b } => {
                if xi >= xi_a && xi <= xi_b {
                    a
                } else {
                    0.0
                }
            }
            ProfileFamily::RationalTail { a, m } => a * (1.0 + xi * xi).powf(-m),
        }
    }

    pub fn state(&self, dim: usize, xi: f64) -> DVector<C64> {
        let amp = C64::new(self.amplitude(xi), 0.0);
        let mut u = DVector::zeros(dim);
        for c in &self.components {
            u[c.idx()] = amp;
        }
        u
    }

    /// `int_R xi^{2k} |U^_0|^2`, i.e. `||d^k U_0||^2`; infinite when it diverges.
    pub fn moment(&self, k: u32) -> f64 {
        let n = self.count();
        let kh = k as f64 + 0.5;
        match self.family {
            ProfileFamily::GaussianFreq { a, b } => n * a * a * gamma(kh) / (2.0 * b).powf(kh),
            ProfileFamily::FreqBand { a, xi_a, xi_b } => {
                let p = 2 * k as i32 + 1;
                n * a * a * 2.0 * (xi_b.powi(p) - xi_a.powi(p)) / p as f64
            }
            ProfileFamily::RationalTail { a, m } => {
                let rest = 2.0 * m - kh;
                if rest <= 0.0 {
                    f64::INFINITY
                } else {
                    n * a * a * beta(kh, rest)
                }
            }
        }
    }

    /// Fraction of `moment(k)` carried by `|xi| > x`.
    pub fn tail_fraction(&self, k: u32, x: f64) -> f64 {
        let kh = k as f64 + 0.5;
        if x <= 0.0 {
            return 1.0;
        }
        match self.family {
            ProfileFamily::GaussianFreq { b, .. } => gamma_ur(kh, 2.0 * b * x * x),
            ProfileFamily::FreqBand { xi_a, xi_b, .. } => {
                if x >= xi_b {
                    0.0
                } else {
                    let p = 2 * k as i32 + 1;
                    let lo = x.max(xi_a);
                    (xi_b.powi(p) - lo.powi(p)) / (xi_b.powi(p) - xi_a.powi(p))
                }
            }
            ProfileFamily::RationalTail { m, .. } => {
                let rest = 2.0 * m - kh;
                if rest <= 0.0 {
                    1.0
                } else {
                    beta_reg(rest, kh, 1.0 / (1.0 + x * x))
                }
            }
        }
    }

    /// Physical-space `||U_0||_{L^1}`. The Gaussian and rational transforms have
    /// positive inverse transforms, so the norm is `sqrt(2 pi) |U^_0(0)|`.
    pub fn l1(&self) -> Option<f64> {
        if let Some(l1) = self.l1_norm {
            return Some(l1);
        }
        match self.family {
            ProfileFamily::GaussianFreq { a, .. } | ProfileFamily::RationalTail { a, .. } => {
                Some(self.count().sqrt() * a.abs() * (2.0 * std::f64::consts::PI).sqrt())
            }
            ProfileFamily::FreqBand { .. } => None,
        }
    }

    /// Integration range `[lo, hi]` on `xi >= 0` for derivative order `j`.
    pub fn support(&self, j: u32, quad: &QuadSpec) -> Result<(f64, f64)> {
        if !self.moment(j).is_finite() {
            return Err(Error::Usage(format!("profile has infinite moment of order {j}")));
        }
        let lo = match self.family {
            ProfileFamily::FreqBand { xi_a, .. } => xi_a,
            _ => 0.0,
        };
        if quad.xi_max > 0.0 {
            let frac = self.tail_fraction(j, quad.xi_max);
            if frac >= TAIL_TOL {
                return Err(Error::Truncation(format!(
                    "xi_max = {} leaves a tail fraction {frac:.3e} >= {TAIL_TOL:e} (j = {j})",
                    quad.xi_max
                )));
            }
            let hi = match self.family {
                ProfileFamily::FreqBand { xi_b, .. } => quad.xi_max.min(xi_b),
                _ => quad.xi_max,
            };
            return Ok((lo, hi));
        }
        if let ProfileFamily::FreqBand { xi_b, .. } = self.family {
            return Ok((lo, xi_b));
        }
        let (mut a, mut b) = (1e-6_f64, 1e9_f64);
        if self.tail_fraction(j, b) > AUTO_TAIL {
            return Err(Error::Truncation(format!("no xi_max below {b:e} meets the tail rule (j = {j})")));
        }
        for _ in 0..200 {
            let mid = (a * b).sqrt();
            if self.tail_fraction(j, mid) > AUTO_TAIL {
                a = mid;
            } else {
                b = mid;
            }
            if b / a < 1.0 + 1e-6 {
                break;
            }
        }
        Ok((lo, b))
    }
}

/// Base panel edges: uniform, or uniform on `[lo, 1]` then geometric when the
/// range spans many decades.
fn base_edges(lo: f64, hi: f64, panels: usize) -> Vec<f64> {
    let panels = panels.max(1);
    if lo < 1.0 && hi > 8.0 && panels >= 4 {
        let n1 = panels / 4;
        let mut e = linspace(lo, 1.0, n1 + 1);
        e.pop();
        e.extend(logspace(1.0, hi, panels - n1 + 1));
        e
    } else {
        linspace(lo, hi, panels + 1)
    }
}

/// Bound on the rate at which the phase difference between two modes can vary
/// with `xi`: twice the norm of the first-order symbol in the energy metric.
pub fn phase_speed(params: &ModelParams) -> f64 {
    let a1 = (generator_entries(params, 1.0) - generator_entries(params, -1.0)) * C64::new(0.5, 0.0);
    let w = energy_weights(params);
    let n = a1.nrows();
    let s = DMatrix::from_fn(n, n, |i, j| a1[(i, j)] * (w[i] / w[j]).sqrt());
    2.0 * linalg::spectral_norm_fast(&s)
}

fn sub_panels(speed: f64, t: f64, width: f64) -> usize {
    ((PHASE_SAFETY * speed * t * width / (2.0 * std::f64::consts::PI)).ceil() as usize).max(1)
}

/// `||d^j U(t)||^2`.
pub fn sobolev_norm_sq(params: &ModelParams, profile: &InitialProfile, j: u32, t: f64, quad: &QuadSpec) -> Result<f64> {
    params.validate()?;
    let dim = params.dim();
    profile.validate(dim)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Usage(format!("time must be finite and nonnegative, got {t}")));
    }
    if quad.panels == 0 || quad.nodes_per_panel == 0 {
        return Err(Error::Usage("quadrature needs at least one panel and one node".into()));
    }
    let (lo, hi) = profile.support(j, quad)?;
    let edges = base_edges(lo, hi, quad.panels);
    let rule = Rule::new(quad.nodes_per_panel);
    let n = profile.count();
    let weight = |xi: f64| xi.powi(2 * j as i32);

    if t == 0.0 {
        let total: f64 = edges
            .windows(2)
            .map(|w| rule.integrate(w[0], w[1], |xi| n * profile.amplitude(xi).powi(2) * weight(xi)))
            .sum();
        return Ok(2.0 * total);
    }

    let speed = phase_speed(params);
    // Screen each base panel: an upper bound on its contribution and a rough estimate.
    let screens: Vec<(f64, f64)> = edges
        .par_windows(2)
        .map(|w| -> Result<(f64, f64)> {
            let (a, b) = (w[0], w[1]);
            let mut bound: f64 = 0.0;
            let mut est = 0.0;
            for xi in linspace(a, b, 5) {
                let p = Propagator::new(params, xi)?;
                let u0 = profile.state(dim, xi);
                let amp = u0.norm_squared() * weight(xi);
                bound = bound.max(p.norm(t).powi(2) * amp);
                est += p.apply(&u0, t).norm_squared() * weight(xi) / 5.0;
            }
            Ok((10.0 * bound * (b - a), est * (b - a)))
        })
        .collect::<Result<_>>()?;
    let reference: f64 = screens.iter().map(|s| s.1).sum::<f64>().max(screens.iter().map(|s| s.0).fold(0.0, f64::max) * 1e-3);

    let mut pieces = Vec::new();
    for (w, s) in edges.windows(2).zip(&screens) {
        if s.0 < SKIP_REL * reference {
            continue;
        }
        let m = sub_panels(speed, t, w[1] - w[0]);
        let sub = linspace(w[0], w[1], m + 1);
        pieces.extend(sub.windows(2).map(|x| (x[0], x[1])));
    }
    let nodes = pieces.len() * rule.len();
    if nodes > NODE_BUDGET {
        return Err(Error::Numerical {
            xi: hi,
            msg: format!("resolving t = {t} over [{lo}, {hi}] needs {nodes} nodes (budget {NODE_BUDGET})"),
        });
    }
    let parts: Vec<f64> = pieces
        .par_iter()
        .map(|&(a, b)| -> Result<f64> {
            let mut s = 0.0;
            for (xi, wt) in rule.mapped(a, b) {
                let p = Propagator::new(params, xi)?;
                s += wt * p.apply(&profile.state(dim, xi), t).norm_squared() * weight(xi);
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    Ok(2.0 * parts.iter().sum::<f64>())
}

/// `||d^j U(t)||_{L^2}`.
pub fn sobolev_norm(params: &ModelParams, profile: &InitialProfile, j: u32, t: f64, quad: &QuadSpec) -> Result<f64> {
    sobolev_norm_sq(params, profile, j, t, quad).map(f64::sqrt)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub times: Vec<f64>,
    /// `||d^j U(t)||_{L^2}` at each time.
    pub values: Vec<f64>,
    pub j: u32,
    pub params: ModelParams,
    pub profile: InitialProfile,
    pub quad: QuadSpec,
}

pub fn decay_curve(
    params: &ModelParams,
    profile: &InitialProfile,
    j: u32,
    times: &[f64],
    quad: &QuadSpec,
) -> Result<DecayCurve> {
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("times must be nonempty and strictly increasing".into()));
    }
    let values = times
        .iter()
        .map(|&t| sobolev_norm(params, profile, j, t, quad))
        .collect::<Result<Vec<_>>>()?;
    if let Some(k) = values.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Numerical { xi: 0.0, msg: format!("norm {} at t = {} is not positive", values[k], times[k]) });
    }
    Ok(DecayCurve { times: times.to_vec(), values, j, params: *params, profile: profile.clone(), quad: *quad })
}

/// Least-squares slope of `ln value` against `ln(1 + t)` over samples in the window.
pub fn fit_exponent(curve: &DecayCurve, window: (f64, f64)) -> Result<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = curve
        .times
        .iter()
        .zip(&curve.values)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, v)| ((1.0 + t).ln(), v.ln()))
        .unzip();
    if x.len() < 8 {
        return Err(Error::Usage(format!(
            "exponent fit needs at least 8 samples in [{}, {}], found {}",
            window.0,
            window.1,
            x.len()
        )));
    }
    Ok(least_squares_line(&x, &y).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rate", rename_all = "snake_case")]
pub enum SecondTerm {
    /// `(1 + t)^rate` times `||d^{j+l} U_0||`.
    Power(f64),
    /// `exp(-c t)` times `||d^j U_0||`, with `c` supplied by the caller.
    Exponential,
}

/// `(1 + t)^first_exponent ||U_0||_{L^1}` plus the second term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeShape {
    pub first_exponent: f64,
    pub second: SecondTerm,
}

pub fn envelope_shape(params: &ModelParams, j: u32, ell: u32) -> Result<EnvelopeShape> {
    params.validate()?;
    if classify(params).predicted_regime == Regime::NonDecaying {
        return Err(Error::Usage("no decay envelope for a non-decaying configuration".into()));
    }
    if ell == 0 {
        return Err(Error::Usage("ell must be at least 1".into()));
    }
    let (j, l) = (j as f64, ell as f64);
    let zero = params.coupling_order == CouplingOrder::ZeroOrder;
    Ok(match params.placement {
        Placement::Transversal => EnvelopeShape {
            first_exponent: if zero { -1.0 / 16.0 - j / 8.0 } else { -1.0 / 12.0 - j / 6.0 },
            second: SecondTerm::Power(-l / 2.0),
        },
        Placement::Rotation | Placement::Slip => EnvelopeShape {
            first_exponent: if zero { -1.0 / 12.0 - j / 6.0 } else { -1.0 / 8.0 - j / 4.0 },
            second: if params.equal_speeds() { SecondTerm::Exponential } else { SecondTerm::Power(-l / 4.0) },
        },
    })
}

/// The two envelope terms at `t` with unit constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeTerms {
    pub first: f64,
    pub second: f64,
}

/// `ctilde0` is the rate of the exponential second term; unused for power tails.
pub fn envelope_terms(
    params: &ModelParams,
    profile: &InitialProfile,
    j: u32,
    ell: u32,
    t: f64,
    ctilde0: f64,
) -> Result<EnvelopeTerms> {
    let shape = envelope_shape(params, j, ell)?;
    profile.validate(params.dim())?;
    let l1 = profile.l1().ok_or_else(|| {
        Error::Usage("profile has no closed-form L1 norm; supply l1_norm explicitly".into())
    })?;
    let first = (1.0 + t).powf(shape.first_exponent) * l1;
    let second = match shape.second {
        SecondTerm::Power(r) => {
            let h = profile.moment(j + ell);
            if !h.is_finite() {
                return Err(Error::Usage(format!("profile has infinite moment of order {}", j + ell)));
            }
            (1.0 + t).powf(r) * h.sqrt()
        }
        SecondTerm::Exponential => {
            if !(ctilde0.is_finite() && ctilde0 > 0.0) {
                return Err(Error::Usage(format!("exponential tail needs a positive rate, got {ctilde0}")));
            }
            (-ctilde0 * t).exp() * profile.moment(j).sqrt()
        }
    };
    Ok(EnvelopeTerms { first, second })
}

/// Right side of the decay estimate with constant `c0`.
pub fn envelope(
    params: &ModelParams,
    profile: &InitialProfile,
    j: u32,
    ell: u32,
    t: f64,
    c0: f64,
    ctilde0: f64,
) -> Result<f64> {
    let e = envelope_terms(params, profile, j, ell, t, ctilde0)?;
    Ok(c0 * (e.first + e.second))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    /// Smallest constant with `value <= c0 (first + second)` at every sample.
    pub c0: f64,
    /// Constant needed if the first term alone had to carry the bound.
    pub c0_first: f64,
    /// Constant needed if the second term alone had to carry the bound.
    pub c0_second: f64,
    pub shape: EnvelopeShape,
}

pub fn fit_envelope(curve: &DecayCurve, ell: u32, ctilde0: f64) -> Result<EnvelopeFit> {
    let shape = envelope_shape(&curve.params, curve.j, ell)?;
    let (mut c0, mut c0_first, mut c0_second) = (0.0_f64, 0.0_f64, 0.0_f64);
    for (&t, &v) in curve.times.iter().zip(&curve.values) {
        let e = envelope_terms(&curve.params, &curve.profile, curve.j, ell, t, ctilde0)?;
        c0 = c0.max(v / (e.first + e.second));
        c0_first = c0_first.max(v / e.first);
        c0_second = c0_second.max(v / e.second);
    }
    Ok(EnvelopeFit { c0, c0_first, c0_second, shape })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub band_center: f64,
    pub band_width: f64,
    /// Time for the band energy to fall by a factor `e`; infinite if it never does on the grid.
    pub decay_timescale: f64,
    pub predicted_timescale: f64,
    /// `min -2 sigma / f` over `[10, 100]`.
    pub c_fit: f64,
    pub ratio: f64,
}

/// Evolve band data `|xi - xi0| <= w/2` along the least-damped eigenvector at
/// `xi0` and time the e-fold of the band energy. Data with components on the
/// strongly damped modes would lose most of its energy on an O(1) time scale
/// and hide the slow branch.
pub fn regularity_loss_probe(params: &ModelParams, band_center: f64, band_width: f64, t_grid: &[f64]) -> Result<ProbeReport> {
    params.validate()?;
    if classify(params).predicted_regime == Regime::NonDecaying {
        return Err(Error::Regime("the band energy of a non-decaying configuration does not decay".into()));
    }
    if !(band_center >= 10.0 && band_width > 0.0 && band_width < band_center) {
        return Err(Error::Usage(format!(
            "probe needs band_center >= 10 and 0 < band_width < band_center, got {band_center}, {band_width}"
        )));
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] < 0.0 {
        return Err(Error::Usage("t_grid must be nonempty, nonnegative and increasing".into()));
    }
    let c_fit = logspace(10.0, 100.0, 19)
        .into_iter()
        .map(|xi| -> Result<f64> {
            let s = crate::spectral::abscissa_unchecked(params, xi)?;
            Ok(-2.0 * s / decay_function(params, xi)?)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let predicted = 1.0 / (c_fit * decay_function(params, band_center)?);

    let w = energy_weights(params);
    let (a, b) = (band_center - 0.5 * band_width, band_center + 0.5 * band_width);
    let t_max = *t_grid.last().unwrap();
    let m = sub_panels(phase_speed(params), t_max, b - a);
    let rule = Rule::new(8);
    let edges = linspace(a, b, m + 1);
    let nodes: Vec<(f64, f64)> = edges.windows(2).flat_map(|e| rule.mapped(e[0], e[1]).collect::<Vec<_>>()).collect();
    let u0 = slowest_mode(params, band_center)?;
    let props: Vec<Propagator> = nodes.par_iter().map(|&(xi, _)| Propagator::new(params, xi)).collect::<Result<_>>()?;
    let band_energy = |t: f64| -> f64 {
        let parts: Vec<f64> = props
            .par_iter()
            .zip(nodes.par_iter())
            .map(|(p, &(_, wt))| wt * 0.5 * linalg::weighted_norm_sq(&w, &p.apply(&u0, t)))
            .collect();
        parts.iter().sum()
    };
    let e0 = band_energy(0.0);
    let target = e0 / std::f64::consts::E;
    let mut prev = (0.0, e0);
    let mut decay_timescale = f64::INFINITY;
    for &t in t_grid.iter().filter(|t| **t > 0.0) {
        let e = band_energy(t);
        if e <= target {
            let (t0, l0, l1) = (prev.0, prev.1.ln(), e.ln());
            decay_timescale = t0 + (t - t0) * (l0 - target.ln()) / (l0 - l1);
            break;
        }
        prev = (t, e);
    }
    Ok(ProbeReport {
        band_center,
        band_width,
        decay_timescale,
        predicted_timescale: predicted,
        c_fit,
        ratio: decay_timescale / predicted,
    })
}

/// Eigenvector of the eigenvalue with the largest real part, scaled to unit energy.
fn slowest_mode(params: &ModelParams, xi: f64) -> Result<DVector<C64>> {
    let eig = linalg::eigen(&generator_entries(params, xi))
        .ok_or_else(|| Error::Numerical { xi, msg: "eigen-decomposition failed".into() })?;
    let k = (0..eig.values.len()).max_by(|&a, &b| eig.values[a].re.total_cmp(&eig.values[b].re)).unwrap();
    let v = eig.vectors.column(k).into_owned();
    let e = 0.5 * linalg::weighted_norm_sq(&energy_weights(params), &v);
    Ok(v.unscale(e.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeIntegralReport {
    pub sigma: f64,
    pub p: f64,
    pub r: f64,
    /// `sup_t (1 + t)^{(sigma+1)/p} int_0^1 xi^sigma exp(-r t xi^p)`.
    pub sup: f64,
    pub sup_t: f64,
    /// `max{2^a/(sigma+1), 2^a Gamma(a)/(p r^a)}` with `a = (sigma+1)/p`.
    pub constant: f64,
    pub passed: bool,
}

/// `int_0^1 xi^sigma exp(-r t xi^p)` after the substitution `s = xi^{sigma+1}`,
/// on panels graded toward the origin.
pub fn time_integral(sigma: f64, p: f64, r: f64, t: f64) -> f64 {
    let q = p / (sigma + 1.0);
    let scale = 1.0 / (sigma + 1.0);
    let rt = r * t;
    if rt == 0.0 {
        return scale;
    }
    let rule = Rule::new(16);
    let s0 = rt.powf(-1.0 / q).min(1.0);
    let mut edges = vec![0.0];
    let mut s = s0 * 2f64.powi(-40);
    while s < 1.0 {
        edges.push(s);
        if rt * s.powf(q) > 750.0 {
            break;
        }
        s *= 2.0;
    }
    if *edges.last().unwrap() < 1.0 && rt * edges.last().unwrap().powf(q) <= 750.0 {
        edges.push(1.0);
    }
    scale * edges.windows(2).map(|e| rule.integrate(e[0], e[1], |s| (-rt * s.powf(q)).exp())).sum::<f64>()
}

pub fn lemma_time_integral_check(sigma: f64, p: f64, r: f64, t_grid: &[f64]) -> Result<TimeIntegralReport> {
    if !(sigma > -1.0 && sigma.is_finite()) || !(p > 0.0 && p.is_finite()) || !(r > 0.0 && r.is_finite()) {
        return Err(Error::Usage(format!("need sigma > -1, p > 0, r > 0, got {sigma}, {p}, {r}")));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || t_grid.is_empty() {
        return Err(Error::Usage("t_grid must be nonempty, finite and nonnegative".into()));
    }
    let a = (sigma + 1.0) / p;
    let (mut sup, mut sup_t) = (0.0_f64, 0.0);
    for &t in t_grid {
        let v = time_integral(sigma, p, r, t) * (1.0 + t).powf(a);
        if v > sup {
            sup = v;
            sup_t = t;
        }
    }
    if !sup.is_finite() {
        return Err(Error::Numerical { xi: 0.0, msg: format!("time integral sup is not finite at t = {sup_t}") });
    }
    let two_a = 2f64.powf(a);
    let constant = (two_a / (sigma + 1.0)).max(two_a * gamma(a) / (p * r.powf(a)));
    Ok(TimeIntegralReport { sigma, p, r, sup, sup_t, constant, passed: sup <= constant })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupReport {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    /// Largest `sup_{x >= 1} h(x) / ((1 + s1/(s2 s3))^{s1/s3} (1 + t)^{-s1/s3})`.
    pub worst_ratio: f64,
    pub worst_t: f64,
    /// Largest relative gap between the numerical maximizer and `(s2 s3 t / s1)^{1/s3}`.
    pub stationary_mismatch: f64,
    pub passed: bool,
}

/// Maximizer of `-s1 y - s2 t exp(-s3 y)` over `y = ln x >= 0` by golden section;
/// the function is concave in `y`.
fn log_sup_argmax(s1: f64, s2: f64, s3: f64, t: f64) -> f64 {
    let phi = |y: f64| -s1 * y - s2 * t * (-s3 * y).exp();
    let guess = if t > 0.0 { ((s2 * s3 * t / s1).ln() / s3).max(0.0) } else { 0.0 };
    let (mut lo, mut hi) = (0.0, guess + 10.0 / s3.min(1.0) + 1.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (phi(x1), phi(x2));
    while hi - lo > 1e-13 * (1.0 + hi.abs()) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = phi(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = phi(x1);
        }
    }
    let y = 0.5 * (lo + hi);
    if phi(0.0) >= phi(y) {
        0.0
    } else {
        y
    }
}

pub fn lemma_sup_check(s1: f64, s2: f64, s3: f64, t_grid: &[f64]) -> Result<SupReport> {
    let pos = |x: f64| x.is_finite() && x > 0.0;
    if !(pos(s1) && pos(s2) && pos(s3)) {
        return Err(Error::Usage(format!("need positive s1, s2, s3, got {s1}, {s2}, {s3}")));
    }
    let log_c = (s1 / s3) * (1.0 + s1 / (s2 * s3)).ln();
    let (mut worst_ratio, mut worst_t, mut mismatch) = (0.0_f64, 0.0, 0.0_f64);
    for &t in t_grid {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Usage(format!("times must be finite and nonnegative, got {t}")));
        }
        let y = log_sup_argmax(s1, s2, s3, t);
        let log_h = -s1 * y - s2 * t * (-s3 * y).exp();
        let ratio = (log_h - log_c + (s1 / s3) * t.ln_1p()).exp();
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_t = t;
        }
        if t > s1 / (s2 * s3) {
            let x_star = (s2 * s3 * t / s1).powf(1.0 / s3);
            mismatch = mismatch.max((y.exp() - x_star).abs() / x_star);
        }
    }
    Ok(SupReport { s1, s2, s3, worst_ratio, worst_t, stationary_mismatch: mismatch, passed: worst_ratio <= 1.0 + 1e-8 })
}
