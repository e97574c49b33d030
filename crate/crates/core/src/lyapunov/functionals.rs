//! Correction functionals as tables of `Re(c * a * conj(b))` terms.
//!
//! Each builder follows the multiplier construction for one placement; the
//! Cattaneo variants extend the Fourier functional with `q` terms. With
//! [`Transcription::Corrected`] a few coefficients differ from the printed
//! ones: the slip `I1` uses the `k3/k1` multiplier of its `u phi` term, and the
//! Cattaneo `q` coefficients are those that cancel every `eta` cross term other
//! than `eta q` in the time derivative. Multipliers
//! that the construction requires to dominate `gamma` or `k4` enter with the
//! sign of that coefficient so the construction also holds for negative values.

use nalgebra::DMatrix;

use crate::model::{Component, HeatLaw, ModelParams, Placement, C64};

use super::{LyapunovConfig, Transcription};
use Component::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coef: C64,
    pub a: Component,
    pub b: Component,
}

/// `weight * sum Re(coef * a * conj(b))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    pub terms: Vec<Term>,
    pub weight: f64,
}

impl Functional {
    /// Hermitian `H` with `U^H H U = sum Re(coef * U_a * conj(U_b))` (unweighted).
    pub fn hermitian(&self, dim: usize) -> DMatrix<C64> {
        let mut h = DMatrix::<C64>::zeros(dim, dim);
        for t in &self.terms {
            let (a, b) = (t.a.idx(), t.b.idx());
            if a == b {
                h[(a, a)] += C64::new(t.coef.re, 0.0);
            } else {
                h[(b, a)] += t.coef * 0.5;
                h[(a, b)] += t.coef.conj() * 0.5;
            }
        }
        h
    }

    /// Direct evaluation of the unweighted sum on a state.
    pub fn eval(&self, u: &[C64]) -> f64 {
        self.terms.iter().map(|t| (t.coef * u[t.a.idx()] * u[t.b.idx()].conj()).re).sum()
    }
}

#[derive(Default)]
struct Builder {
    terms: Vec<Term>,
}

impl Builder {
    /// `Re(c a conj(b))`
    fn re(&mut self, c: f64, a: Component, b: Component) -> &mut Self {
        self.terms.push(Term { coef: C64::new(c, 0.0), a, b });
        self
    }

    /// `Re(i c a conj(b))`
    fn im(&mut self, c: f64, a: Component, b: Component) -> &mut Self {
        self.terms.push(Term { coef: C64::new(0.0, c), a, b });
        self
    }

    /// Appends `scale * other`.
    fn add_scaled(&mut self, scale: f64, other: Builder) -> &mut Self {
        self.terms.extend(other.terms.into_iter().map(|t| Term { coef: t.coef * scale, ..t }));
        self
    }
}

fn geometric(x2: f64, m: i32) -> f64 {
    (0..=m).map(|p| x2.powi(p)).sum()
}

/// `tilde f`: `1 + x^2 + x^4` with equal speeds, `1 + ... + x^8` otherwise.
fn tilde_f(params: &ModelParams, x2: f64) -> f64 {
    if params.equal_speeds() {
        geometric(x2, 2)
    } else {
        geometric(x2, 4)
    }
}

pub fn build(params: &ModelParams, cfg: &LyapunovConfig, xi: f64) -> Functional {
    match params.placement {
        Placement::Transversal => transversal(params, cfg, xi),
        Placement::Rotation => rotation(params, cfg, xi),
        Placement::Slip => slip(params, cfg, xi),
    }
}

fn signed(params: &ModelParams, cfg: &LyapunovConfig) -> (f64, f64) {
    let l5 = params.gamma.signum() * cfg.lambda5;
    let l6 = params.k4.signum() * cfg.lambda6.unwrap_or(0.0);
    (l5, l6)
}

fn transversal(params: &ModelParams, cfg: &LyapunovConfig, x: f64) -> Functional {
    let (k1, k2, k3, k4, g) = (params.k1, params.k2, params.k3, params.k4, params.gamma);
    let (l1, l2, l3, l4) = (cfg.lambda1, cfg.lambda2, cfg.lambda3, cfg.lambda4);
    let (l5, l6) = signed(params, cfg);
    let x2 = x * x;
    let x4 = x2 * x2;
    let d = k2 - k3;

    let mut f0 = Builder::default();
    f0.im(l1 * x, Y, Z)
        .im(l3 * x, Theta, Phi)
        .re(-l4 * x2, Theta, V)
        .im(-(l4 + 1.0) * k2 / d * x, Z, Theta)
        .im((l4 + 1.0) * k3 / d * x, Phi, Y)
        .re(-x2, Y, V)
        .im(l2 * x, U, V);

    let i1 = k2 * x2 - k1 * l1 - (l4 + 1.0) * k1 * k2 / d;
    let i2 = k3 * l4 * x2 - k1 * l3 + (l4 + 1.0) * k1 * k3 / d;
    let mut inner = Builder::default();
    inner.add_scaled(1.0, f0).re(-i1 / k1, U, Z).re(-i2 / k1, U, Phi);

    let i3 = l2 + i2 / k1 - l4 * x2;
    let i4 = l2 + i1 / k1 - x2;
    let mut f = Builder::default();
    f.add_scaled(x4, inner)
        .im(l5 * x4 * x, U, Eta)
        .re(i3 * x4 / g, Eta, Theta)
        .re(i4 * x4 / g, Eta, Y);

    if params.law == HeatLaw::Cattaneo {
        let i5 = (g * l2 - k1 * l5) * x2 - k1 / g * (i3 + i4);
        let i6 = g / k1 * i2 - k3 / g * i3;
        let i7 = g / k1 * i1 - k2 / g * i4;
        f.im(l6 * x4 * x, Eta, Q)
            .im(i5 * x2 * x / k4, V, Q)
            .re(i6 * x4 / k4, Phi, Q)
            .re(i7 * x4 / k4, Z, Q);
    }
    Functional { terms: f.terms, weight: 1.0 / geometric(x2, 4) }
}

fn rotation(params: &ModelParams, cfg: &LyapunovConfig, x: f64) -> Functional {
    let (k1, k2, k3, k4, g) = (params.k1, params.k2, params.k3, params.k4, params.gamma);
    let (l1, l2, l3, l4) = (cfg.lambda1, cfg.lambda2, cfg.lambda3, cfg.lambda4);
    let (l5, l6) = signed(params, cfg);
    let x2 = x * x;

    let mut f4 = Builder::default();
    // F0
    f4.im(l1 * x, Y, Z)
        .im(-l2 * x, U, V)
        .im(l3 * x, Theta, Phi)
        .re(-l4 * x2, Theta, V)
        .re(x2, Y, V);
    // F1
    f4.re(k2 / k1 * x2 + l1, U, Z);
    // F2
    let p2 = k2 / (k1 * k3) * (k3 * l4 * x2 - k1 * l3);
    let mut b2 = Builder::default();
    b2.im(x, Z, Theta).re(-1.0, U, Z).im(-k3 / k2 * x, Phi, Y);
    f4.add_scaled(p2, b2);
    // F3
    let p3 = -k2 / k3 * (l4 * x2 + l2);
    let mut b3 = Builder::default();
    b3.im(x, Z, Theta).re(-1.0, U, Z).im(-k3 / k2 * x, Phi, Y).re(k3 / k2, U, Phi);
    f4.add_scaled(p3, b3);

    let i1 = 1.0 - l4
        + k2 / (k1 * k3) * (k3 / k2 - 1.0) * (k3 * l4 * x2 - k1 * l3)
        + (k2 / k3 - 1.0) * l4 * x2
        + (k2 / k3 - 1.0) * l2;
    let i2 = ((k2 / k3 - k2 / k1) * l4 + k2 / k1 - 1.0) * x2 + l1 + (k2 / k3 + 1.0) * l2 + k2 / k3 * l3;
    let i3 = g * (1.0 - k3 / k1) * l4 * x2 + g * (l2 + l3);

    let mut f = Builder::default();
    f.add_scaled(1.0, f4).im(l5 * x, Y, Eta).im(-i1 / g * x, Eta, Theta).re(i2 / g, U, Eta);

    let tf = tilde_f(params, x2);
    match params.law {
        HeatLaw::Fourier => Functional { terms: f.terms, weight: x2 / tf },
        HeatLaw::Cattaneo => {
            let mut ft = Builder::default();
            ft.add_scaled(x2, f)
                .im(l6 * x2 * x, Eta, Q)
                .im(-(i3 + k3 / g * i1) * x2 * x / k4, Phi, Q);
            match cfg.transcription {
                Transcription::Printed => ft
                    .re((k1 / g * (i1 - i2) + (k1 * l5 - g * l4) * x2) * x2 / k4, V, Q)
                    .im((k2 * l5 - g * l1) * x2 * x / k4, Z, Q),
                Transcription::Corrected => ft
                    .re((k1 / g * (i1 - i2) + k1 * l5 - g * x2) * x2 / k4, V, Q)
                    .im((g * l1 - k2 * l5) * x2 * x / k4, Z, Q),
            };
            Functional { terms: ft.terms, weight: 1.0 / tf }
        }
    }
}

fn slip(params: &ModelParams, cfg: &LyapunovConfig, x: f64) -> Functional {
    let (k1, k2, k3, k4, g) = (params.k1, params.k2, params.k3, params.k4, params.gamma);
    let (l1, l2, l3, l4) = (cfg.lambda1, cfg.lambda2, cfg.lambda3, cfg.lambda4);
    let (l5, l6) = signed(params, cfg);
    let x2 = x * x;

    let mut f4 = Builder::default();
    // F0
    f4.im(l1 * x, Y, Z)
        .im(-l2 * x, U, V)
        .im(l3 * x, Theta, Phi)
        .re(l4 * x2, Theta, V)
        .re(-x2, Y, V);
    // F1
    f4.re(k3 / k1 * l4 * x2 + l3, U, Phi);
    // F2
    let p2 = -(k2 * x2 - k1 * l1) / k1;
    let mut b2 = Builder::default();
    b2.im(x, Z, Theta).im(-k3 / k2 * x, Phi, Y).re(k3 / k2, U, Phi);
    f4.add_scaled(p2, b2);
    // F3
    let p3 = x2 + l2;
    let mut b3 = Builder::default();
    b3.im(x, Z, Theta).im(-k3 / k2 * x, Phi, Y).re(k3 / k2, U, Phi).re(-1.0, U, Z);
    f4.add_scaled(p3, b3);

    let r = match cfg.transcription {
        Transcription::Printed => k3 / k2,
        Transcription::Corrected => k3 / k1,
    };
    let i1 = ((r - 1.0) * l4 + k3 / k2 - k3 / k1) * x2 + k3 / k2 * l1 + (k3 / k2 + 1.0) * l2 + l3;
    let i2 = g * ((1.0 - k2 / k1) * x2 + l1 + l2);
    let i3 = (k3 / k2 - 1.0) * (x2 + l2) + (1.0 - k3 / k2) * (k2 / k1 * x2 - l1) + l4 - 1.0;

    let mut f = Builder::default();
    f.add_scaled(1.0, f4).im(l5 * x, Theta, Eta).re(i1 / g, U, Eta).im(-i3 / g * x, Eta, Y);

    let tf = tilde_f(params, x2);
    match params.law {
        HeatLaw::Fourier => Functional { terms: f.terms, weight: x2 / tf },
        HeatLaw::Cattaneo => {
            let mut ft = Builder::default();
            ft.add_scaled(x2, f)
                .im(l6 * x2 * x, Eta, Q)
                .re(
                    match cfg.transcription {
                        Transcription::Printed => ((k1 * i3 - i1) / g + (k1 * l5 - g * l4) * x2) * x2 / k4,
                        Transcription::Corrected => (k1 / g * (i3 - i1) + k1 * l5 - g * l4 * x2) * x2 / k4,
                    },
                    V,
                    Q,
                )
                .im((g * l3 - k3 * l5) * x2 * x / k4, Phi, Q)
                .im(-(i2 + k2 / g * i3) * x2 * x / k4, Z, Q);
            Functional { terms: ft.terms, weight: 1.0 / tf }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::{default_multipliers, Transcription};
    use crate::model::generator_entries;
    use nalgebra::DVector;

    fn state(dim: usize, seed: u64) -> Vec<C64> {
        let mut s = seed;
        (0..dim)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let a = ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0;
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let b = ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0;
                C64::new(a, b)
            })
            .collect()
    }

    fn norm2(z: C64) -> f64 {
        z.norm_sqr()
    }

    /// `d/dt F = Re(U^H (H A + A^H H) U)` from the generator.
    fn derivative(params: &ModelParams, f: &Functional, xi: f64, u: &[C64]) -> f64 {
        let h = f.hermitian(params.dim());
        let a = generator_entries(params, xi);
        let uv = DVector::from_column_slice(u);
        let m = &h * &a + a.adjoint() * &h;
        uv.dotc(&(m * &uv)).re
    }

    #[test]
    fn hermitian_matches_direct_evaluation() {
        for placement in Placement::ALL {
            for law in [HeatLaw::Fourier, HeatLaw::Cattaneo] {
                let p = match law {
                    HeatLaw::Fourier => ModelParams::fourier(1.2, 2.0, 3.1, 0.8, 1.4, placement),
                    HeatLaw::Cattaneo => ModelParams::cattaneo(1.2, 2.0, 3.1, 0.8, 1.1, 1.4, placement),
                };
                let cfg = default_multipliers(&p).unwrap();
                let f = build(&p, &cfg, 1.7);
                let u = state(p.dim(), 3);
                let h = f.hermitian(p.dim());
                let uv = DVector::from_column_slice(&u);
                let q = uv.dotc(&(&h * &uv));
                assert!((q.re - f.eval(&u)).abs() < 1e-12 * (1.0 + q.re.abs()));
                assert!(q.im.abs() < 1e-12 * (1.0 + q.re.abs()));
            }
        }
    }

    #[test]
    fn cattaneo_derivative_has_no_eta_cross_terms() {
        for placement in Placement::ALL {
            let p = ModelParams::cattaneo(1.3, 2.2, 0.9, 0.7, 1.1, 1.6, placement);
            let cfg = default_multipliers(&p).unwrap().with_transcription(Transcription::Corrected);
            for xi in [0.3, 1.0, 4.0] {
                let f = build(&p, &cfg, xi);
                let h = f.hermitian(p.dim());
                let a = generator_entries(&p, xi);
                let m = &h * &a + a.adjoint() * &h;
                let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
                for c in [V, U, Z, Y, Phi, Theta] {
                    let e = m[(Eta.idx(), c.idx())].norm();
                    assert!(e < 1e-12 * scale, "{placement:?} xi={xi} eta-{}: {e}", c.name());
                }
            }
        }
    }

    fn eta_cross(p: &ModelParams, cfg: &LyapunovConfig, xi: f64, c: Component) -> f64 {
        let h = build(p, cfg, xi).hermitian(p.dim());
        let a = generator_entries(p, xi);
        (&h * &a + a.adjoint() * &h)[(Eta.idx(), c.idx())].norm()
    }

    #[test]
    fn printed_cattaneo_coefficients_leave_eta_cross_terms() {
        let p = ModelParams::cattaneo(1.3, 2.2, 0.9, 0.7, 1.1, 1.6, Placement::Rotation);
        let cfg = default_multipliers(&p).unwrap();
        assert!(eta_cross(&p, &cfg, 1.0, Z) > 1e-3);
        assert!(eta_cross(&p, &cfg, 1.0, V) > 1e-3);
        let p = ModelParams::cattaneo(1.3, 2.2, 0.9, 0.7, 1.1, 1.6, Placement::Slip);
        let cfg = default_multipliers(&p).unwrap();
        assert!(eta_cross(&p, &cfg, 1.0, V) > 1e-3);
        assert!(eta_cross(&p, &cfg, 1.0, Z) < 1e-12);
    }

    // With the printed slip I1 the theta-u term survives unless k1 = k2.
    #[test]
    fn printed_slip_coefficient_leaves_theta_u_term() {
        let theta_u = |p: &ModelParams, cfg: &LyapunovConfig, xi: f64| {
            let h = build(p, cfg, xi).hermitian(p.dim());
            let a = generator_entries(p, xi);
            (&h * &a + a.adjoint() * &h)[(Theta.idx(), U.idx())]
        };
        let p = ModelParams::fourier(1.3, 2.2, 0.9, 0.7, 1.6, Placement::Slip);
        let printed = default_multipliers(&p).unwrap();
        let corrected = printed.with_transcription(Transcription::Corrected);
        let xi: f64 = 0.7;
        let gap = (p.k3 / p.k1 - p.k3 / p.k2) * printed.lambda4 * xi.powi(3);
        let d = theta_u(&p, &printed, xi) - theta_u(&p, &corrected, xi);
        assert!((d.norm() - 0.5 * gap).abs() < 1e-12, "{d} vs {gap}");
        let q = ModelParams::fourier(2.2, 2.2, 0.9, 0.7, 1.6, Placement::Slip);
        let printed = default_multipliers(&q).unwrap();
        let corrected = printed.with_transcription(Transcription::Corrected);
        assert_eq!(build(&q, &printed, xi), build(&q, &corrected, xi));
    }

    // The printed time-derivative of the transversal functional, evaluated directly.
    #[test]
    fn transversal_derivative_identity() {
        let p = ModelParams::fourier(1.3, 2.2, 0.9, 0.7, 1.6, Placement::Transversal);
        let cfg = default_multipliers(&p).unwrap();
        let (k1, k2, k3, k4, g) = (p.k1, p.k2, p.k3, p.k4, p.gamma);
        let (l1, l2, l3, l4, l5) = (cfg.lambda1, cfg.lambda2, cfg.lambda3, cfg.lambda4, cfg.lambda5);
        for (xi, seed) in [(0.4, 1), (1.0, 2), (2.5, 3)] {
            let u = state(7, seed);
            let [v, uu, z, y, phi, th, eta] = [u[0], u[1], u[2], u[3], u[4], u[5], u[6]];
            let x = xi;
            let x2 = x * x;
            let (x4, x6) = (x2 * x2, x2 * x2 * x2);
            let i = C64::i();
            let d = k2 - k3;
            let i1 = k2 * x2 - k1 * l1 - (l4 + 1.0) * k1 * k2 / d;
            let i2 = k3 * l4 * x2 - k1 * l3 + (l4 + 1.0) * k1 * k3 / d;
            let i3 = l2 + i2 / k1 - l4 * x2;
            let i4 = l2 + i1 / k1 - x2;
            let expected = -x6
                * (k2 * l1 * norm2(z)
                    + k3 * l3 * norm2(phi)
                    + (1.0 - l1) * norm2(y)
                    + (l4 - l3) * norm2(th)
                    + (k1 * l2 - k1 * l4 - k1) * norm2(v))
                - (g * l5 - l2) * x6 * norm2(uu)
                + g * l5 * x6 * norm2(eta)
                + l5 * x6 * (i * k4 * x * eta * uu.conj() - k1 * v * eta.conj()).re
                + i3 / g * x4 * (i * k3 * x * phi * eta.conj() - k4 * x2 * eta * th.conj() - k1 * v * eta.conj()).re
                + i4 / g * x4 * (i * k2 * x * z * eta.conj() - k4 * x2 * eta * y.conj() - k1 * v * eta.conj()).re
                + g * x4 * (i * x * (i1 / k1 * eta * z.conj() + i2 / k1 * eta * phi.conj()) + l2 * x2 * eta * v.conj()).re;
            let f = build(&p, &cfg, xi);
            let got = derivative(&p, &f, xi, &u);
            assert!((got - expected).abs() < 1e-9 * (1.0 + expected.abs()), "xi={xi}: {got} vs {expected}");
        }
    }

    #[test]
    fn rotation_derivative_identity() {
        let p = ModelParams::fourier(1.3, 2.2, 0.9, 0.7, 1.6, Placement::Rotation);
        let cfg = default_multipliers(&p).unwrap();
        let (k1, k2, k3, k4, g) = (p.k1, p.k2, p.k3, p.k4, p.gamma);
        let (l1, l2, l3, l4, l5) = (cfg.lambda1, cfg.lambda2, cfg.lambda3, cfg.lambda4, cfg.lambda5);
        for (xi, seed) in [(0.4, 4), (1.0, 5), (2.5, 6)] {
            let u = state(7, seed);
            let [v, uu, z, y, phi, th, eta] = [u[0], u[1], u[2], u[3], u[4], u[5], u[6]];
            let x = xi;
            let x2 = x * x;
            let i = C64::i();
            let i1 = 1.0 - l4
                + k2 / (k1 * k3) * (k3 / k2 - 1.0) * (k3 * l4 * x2 - k1 * l3)
                + (k2 / k3 - 1.0) * l4 * x2
                + (k2 / k3 - 1.0) * l2;
            let i2 = ((k2 / k3 - k2 / k1) * l4 + k2 / k1 - 1.0) * x2 + l1 + (k2 / k3 + 1.0) * l2 + k2 / k3 * l3;
            let i3 = g * (1.0 - k3 / k1) * l4 * x2 + g * (l2 + l3);
            let f6 = g * l5 * x2 * norm2(eta)
                + x2 * (g * l1 * eta * z.conj() - i * g * x * eta * v.conj() - i3 * eta * phi.conj()
                    + i * k4 * l5 * x * eta * y.conj()
                    - k2 * l5 * eta * z.conj())
                .re
                - k1 * l5 * (i * x * v * eta.conj()).re
                - i1 / g * (k3 * x2 * phi * eta.conj() + i * k1 * x * v * eta.conj() - i * k4 * x * x2 * eta * th.conj()).re
                + i2 / g * (i * k1 * x * v * eta.conj() - k4 * x2 * eta * uu.conj()).re;
            let expected = -x2
                * ((k1 - k1 * l2 - k1 * l4) * norm2(v)
                    + k2 * l1 * norm2(z)
                    + (l4 - l3) * norm2(th)
                    + l2 * norm2(uu)
                    + k3 * l3 * norm2(phi))
                - x2 * (g * l5 - (l1 + 1.0)) * norm2(y)
                + f6;
            let f = build(&p, &cfg, xi);
            let got = derivative(&p, &f, xi, &u);
            assert!((got - expected).abs() < 1e-9 * (1.0 + expected.abs()), "xi={xi}: {got} vs {expected}");
        }
    }

    #[test]
    fn slip_derivative_identity() {
        let p = ModelParams::fourier(1.3, 2.2, 0.9, 0.7, 1.6, Placement::Slip);
        let cfg = default_multipliers(&p).unwrap().with_transcription(Transcription::Corrected);
        let (k1, k2, k3, k4, g) = (p.k1, p.k2, p.k3, p.k4, p.gamma);
        let (l1, l2, l3, l4, l5) = (cfg.lambda1, cfg.lambda2, cfg.lambda3, cfg.lambda4, cfg.lambda5);
        for (xi, seed) in [(0.4, 7), (1.0, 8), (2.5, 9)] {
            let u = state(7, seed);
            let [v, uu, z, y, phi, th, eta] = [u[0], u[1], u[2], u[3], u[4], u[5], u[6]];
            let x = xi;
            let x2 = x * x;
            let i = C64::i();
            let i1 = ((k3 / k1 - 1.0) * l4 + k3 / k2 - k3 / k1) * x2 + k3 / k2 * l1 + (k3 / k2 + 1.0) * l2 + l3;
            let i2 = g * ((1.0 - k2 / k1) * x2 + l1 + l2);
            let i3 = (k3 / k2 - 1.0) * (x2 + l2) + (1.0 - k3 / k2) * (k2 / k1 * x2 - l1) + l4 - 1.0;
            let f6 = g * l5 * x2 * norm2(eta)
                - x2 * (i2 * eta * z.conj() + i * g * l4 * x * eta * v.conj() - g * l3 * eta * phi.conj()
                    - i * k4 * l5 * x * eta * th.conj()
                    + k3 * l5 * phi * eta.conj())
                .re
                - k1 * l5 * (i * x * v * eta.conj()).re
                - i1 / g * (k4 * x2 * eta * uu.conj() - i * k1 * x * v * eta.conj()).re
                + i3 / g * (i * k4 * x * x2 * eta * y.conj() - k2 * x2 * eta * z.conj() - i * k1 * x * v * eta.conj()).re;
            let expected = -x2
                * ((k1 * l4 - k1 * l2 - k1) * norm2(v)
                    + k2 * l1 * norm2(z)
                    + (1.0 - l1) * norm2(y)
                    + l2 * norm2(uu)
                    + k3 * l3 * norm2(phi))
                - (g * l5 - l3 - l4) * x2 * norm2(th)
                + f6;
            let f = build(&p, &cfg, xi);
            let got = derivative(&p, &f, xi, &u);
            assert!((got - expected).abs() < 1e-9 * (1.0 + expected.abs()), "xi={xi}: {got} vs {expected}");
        }
    }
}
