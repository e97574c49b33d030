//! Model parameters, case classification and the frequency-domain generator.
//!
//! The state at a frequency `xi` is the Fourier transform of
//! `(v, u, z, y, phi, theta, eta[, q])` with
//! `u = phi_t`, `y = psi_t`, `theta = w_t`, `v = phi_x + psi + w`,
//! `z = psi_x`, `phi = w_x` (here `phi` names the slip gradient, not the
//! transversal displacement). The generator `A(xi)` satisfies `U_t = A(xi) U`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Index of each state component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    V = 0,
    U = 1,
    Z = 2,
    Y = 3,
    Phi = 4,
    Theta = 5,
    Eta = 6,
    Q = 7,
}

impl Component {
    pub const ALL: [Component; 8] = [
        Component::V,
        Component::U,
        Component::Z,
        Component::Y,
        Component::Phi,
        Component::Theta,
        Component::Eta,
        Component::Q,
    ];

    #[inline]
    pub fn idx(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Component::V => "v",
            Component::U => "u",
            Component::Z => "z",
            Component::Y => "y",
            Component::Phi => "phi",
            Component::Theta => "theta",
            Component::Eta => "eta",
            Component::Q => "q",
        }
    }

    pub fn parse(s: &str) -> Option<Component> {
        Component::ALL.iter().copied().find(|c| c.name() == s)
    }
}

/// Which mechanical equation carries the thermal coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// `(tau1, tau2, tau3) = (1, 0, 0)`: transversal displacement.
    Transversal,
    /// `(0, 1, 0)`: rotation angle.
    Rotation,
    /// `(0, 0, 1)`: interfacial slip.
    Slip,
}

impl Placement {
    pub const ALL: [Placement; 3] = [Placement::Transversal, Placement::Rotation, Placement::Slip];

    pub fn taus(self) -> [f64; 3] {
        match self {
            Placement::Transversal => [1.0, 0.0, 0.0],
            Placement::Rotation => [0.0, 1.0, 0.0],
            Placement::Slip => [0.0, 0.0, 1.0],
        }
    }

    /// The velocity component that the heat equation couples to.
    pub fn coupled_velocity(self) -> Component {
        match self {
            Placement::Transversal => Component::U,
            Placement::Rotation => Component::Y,
            Placement::Slip => Component::Theta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeatLaw {
    Fourier,
    Cattaneo,
}

impl HeatLaw {
    pub fn dim(self) -> usize {
        match self {
            HeatLaw::Fourier => 7,
            HeatLaw::Cattaneo => 8,
        }
    }
}

/// Order in `x` of the thermal coupling terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingOrder {
    /// `tau_j gamma eta_x` and `gamma (tau . velocities)_x`.
    FirstOrder,
    /// `tau_j gamma eta` and `-gamma (tau . velocities)`.
    ZeroOrder,
}

pub const DEFAULT_EQ_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    /// Relaxation coefficient, only meaningful for the Cattaneo law.
    pub k5: Option<f64>,
    pub gamma: f64,
    pub placement: Placement,
    pub law: HeatLaw,
    pub coupling_order: CouplingOrder,
    pub eq_tol: f64,
}

impl ModelParams {
    pub fn fourier(k1: f64, k2: f64, k3: f64, k4: f64, gamma: f64, placement: Placement) -> Self {
        ModelParams {
            k1,
            k2,
            k3,
            k4,
            k5: None,
            gamma,
            placement,
            law: HeatLaw::Fourier,
            coupling_order: CouplingOrder::FirstOrder,
            eq_tol: DEFAULT_EQ_TOL,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn cattaneo(
        k1: f64,
        k2: f64,
        k3: f64,
        k4: f64,
        k5: f64,
        gamma: f64,
        placement: Placement,
    ) -> Self {
        ModelParams {
            k1,
            k2,
            k3,
            k4,
            k5: Some(k5),
            gamma,
            placement,
            law: HeatLaw::Cattaneo,
            coupling_order: CouplingOrder::FirstOrder,
            eq_tol: DEFAULT_EQ_TOL,
        }
    }

    pub fn with_coupling_order(mut self, order: CouplingOrder) -> Self {
        self.coupling_order = order;
        self
    }

    pub fn with_eq_tol(mut self, eq_tol: f64) -> Self {
        self.eq_tol = eq_tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.law.dim()
    }

    /// `k5`, or 0 for the Fourier law.
    pub fn k5_or_zero(&self) -> f64 {
        self.k5.unwrap_or(0.0)
    }

    /// Checks coefficient ranges. Negative `gamma` is allowed for both laws
    /// and negative `k4` for the Cattaneo law; the generator is assembled from
    /// the equations themselves, so the sign flips need no special handling.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.k1, self.k2, self.k3, self.k4, self.gamma, self.eq_tol]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParams("coefficients must be finite".into()));
        }
        for (name, k) in [("k1", self.k1), ("k2", self.k2), ("k3", self.k3)] {
            if k <= 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {k}")));
            }
        }
        if self.gamma == 0.0 {
            return Err(Error::InvalidParams("gamma must be nonzero".into()));
        }
        if !(self.eq_tol > 0.0) {
            return Err(Error::InvalidParams("eq_tol must be positive".into()));
        }
        match self.law {
            HeatLaw::Fourier => {
                if self.k4 <= 0.0 {
                    return Err(Error::InvalidParams(format!(
                        "k4 must be positive under the Fourier law, got {}",
                        self.k4
                    )));
                }
                if self.k5.is_some() {
                    return Err(Error::InvalidParams("k5 is only defined for the Cattaneo law".into()));
                }
            }
            HeatLaw::Cattaneo => {
                if self.k4 == 0.0 {
                    return Err(Error::InvalidParams("k4 must be nonzero".into()));
                }
                match self.k5 {
                    Some(k5) if k5 > 0.0 && k5.is_finite() => {}
                    Some(k5) => {
                        return Err(Error::InvalidParams(format!("k5 must be positive, got {k5}")))
                    }
                    None => return Err(Error::InvalidParams("Cattaneo law requires k5".into())),
                }
            }
        }
        Ok(())
    }

    /// `alpha1 = min{k1,k2,k3,1}/2` in `alpha1 |U|^2 <= E <= alpha2 |U|^2`.
    pub fn alpha1(&self) -> f64 {
        0.5 * self.k1.min(self.k2).min(self.k3).min(1.0)
    }

    pub fn alpha2(&self) -> f64 {
        0.5 * self.k1.max(self.k2).max(self.k3).max(1.0)
    }

    /// Upper bound on `||exp(A t)||_2` implied by dissipativity and norm equivalence.
    pub fn uniform_propagator_bound(&self) -> f64 {
        (self.alpha2() / self.alpha1()).sqrt()
    }

    pub fn equal_speeds(&self) -> bool {
        rel_eq(self.k1, self.k2, self.eq_tol) && rel_eq(self.k2, self.k3, self.eq_tol)
    }

    pub fn k2_eq_k3(&self) -> bool {
        rel_eq(self.k2, self.k3, self.eq_tol)
    }
}

fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// A purely imaginary eigenvalue exists at every frequency.
    NonDecaying,
    /// Decay rate vanishes at high frequency; estimates trade derivatives for decay.
    RegularityLoss,
    /// High-frequency decay rate is bounded below.
    ExponentialMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseTag {
    pub placement: Placement,
    pub law: HeatLaw,
    pub coupling_order: CouplingOrder,
    pub equal_speeds: bool,
    pub k2_eq_k3: bool,
    /// `|k2 - k3|`, recorded so near-threshold runs can be flagged downstream.
    pub k2_k3_gap: f64,
    pub predicted_regime: Regime,
}

pub fn classify(params: &ModelParams) -> CaseTag {
    let equal_speeds = params.equal_speeds();
    let k2_eq_k3 = params.k2_eq_k3();
    let predicted_regime = match params.placement {
        Placement::Transversal if k2_eq_k3 => Regime::NonDecaying,
        Placement::Rotation | Placement::Slip
            if equal_speeds && params.coupling_order == CouplingOrder::FirstOrder =>
        {
            Regime::ExponentialMode
        }
        _ => Regime::RegularityLoss,
    };
    CaseTag {
        placement: params.placement,
        law: params.law,
        coupling_order: params.coupling_order,
        equal_speeds,
        k2_eq_k3,
        k2_k3_gap: (params.k2 - params.k3).abs(),
        predicted_regime,
    }
}

/// Complex state at one frequency, ordered `(v, u, z, y, phi, theta, eta[, q])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(pub DVector<C64>);

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        StateVector(DVector::zeros(dim))
    }

    pub fn from_slice(values: &[C64]) -> Self {
        StateVector(DVector::from_column_slice(values))
    }

    pub fn unit(dim: usize, component: Component) -> Self {
        let mut s = Self::zeros(dim);
        s.0[component.idx()] = C64::new(1.0, 0.0);
        s
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, c: Component) -> C64 {
        self.0[c.idx()]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }
}

/// `A(xi)` with `U_t = A(xi) U`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    pub xi: f64,
    pub entries: DMatrix<C64>,
}

impl GeneratorMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn at(&self, row: Component, col: Component) -> C64 {
        self.entries[(row.idx(), col.idx())]
    }
}

pub fn assemble_generator(params: &ModelParams, xi: f64) -> Result<GeneratorMatrix> {
    params.validate()?;
    if !xi.is_finite() {
        return Err(Error::Usage(format!("frequency must be finite, got {xi}")));
    }
    Ok(GeneratorMatrix { xi, entries: generator_entries(params, xi) })
}

/// Generator entries without validation; callers must have validated `params`.
pub(crate) fn generator_entries(params: &ModelParams, xi: f64) -> DMatrix<C64> {
    use Component::*;
    let n = params.dim();
    let mut a = DMatrix::<C64>::zeros(n, n);
    let i = C64::i();
    let re = |x: f64| C64::new(x, 0.0);
    let (k1, k2, k3, k4, g) = (params.k1, params.k2, params.k3, params.k4, params.gamma);
    let mut set = |r: Component, c: Component, val: C64| a[(r.idx(), c.idx())] += val;

    // mechanical part, independent of the heat law
    set(V, U, i * xi);
    set(V, Y, re(1.0));
    set(V, Theta, re(1.0));
    set(U, V, i * (k1 * xi));
    set(Z, Y, i * xi);
    set(Y, Z, i * (k2 * xi));
    set(Y, V, re(-k1));
    set(Phi, Theta, i * xi);
    set(Theta, Phi, i * (k3 * xi));
    set(Theta, V, re(-k1));

    // thermal coupling: mechanical row gets -i tau gamma xi eta,
    // heat row gets -i gamma xi (tau . velocities); zero order uses
    // tau gamma eta and +gamma (tau . velocities) on the right-hand side
    let vel = params.placement.coupled_velocity();
    match params.coupling_order {
        CouplingOrder::FirstOrder => {
            set(vel, Eta, -i * (g * xi));
            set(Eta, vel, -i * (g * xi));
        }
        CouplingOrder::ZeroOrder => {
            set(vel, Eta, re(-g));
            set(Eta, vel, re(g));
        }
    }

    match params.law {
        HeatLaw::Fourier => set(Eta, Eta, re(-k4 * xi * xi)),
        HeatLaw::Cattaneo => {
            let k5 = params.k5_or_zero();
            set(Eta, Q, -i * (k4 * xi));
            set(Q, Q, re(-k5));
            set(Q, Eta, -i * (k4 * xi));
        }
    }
    a
}

/// Diagonal of `W` in `E = (1/2) U^H W U`.
pub fn energy_weights(params: &ModelParams) -> Vec<f64> {
    let mut w = vec![params.k1, 1.0, params.k2, 1.0, params.k3, 1.0, 1.0];
    if params.law == HeatLaw::Cattaneo {
        w.push(1.0);
    }
    w
}

/// Diagonal of `D(xi)` in `W A + A^H W = -D(xi)`.
pub fn dissipation_diagonal(params: &ModelParams, xi: f64) -> Vec<f64> {
    let mut d = vec![0.0; params.dim()];
    match params.law {
        HeatLaw::Fourier => d[Component::Eta.idx()] = 2.0 * params.k4 * xi * xi,
        HeatLaw::Cattaneo => d[Component::Q.idx()] = 2.0 * params.k5_or_zero(),
    }
    d
}

/// The frequency weight `f(xi)` in `|U(xi,t)|^2 <= c~ exp(-c f(xi) t) |U0(xi)|^2`.
///
/// The same `f` serves both heat laws.
pub fn decay_function(params: &ModelParams, xi: f64) -> Result<f64> {
    let tag = classify(params);
    if tag.predicted_regime == Regime::NonDecaying {
        return Err(Error::Regime(
            "transversal coupling with k2 = k3 does not decay; f is undefined".into(),
        ));
    }
    let x2 = xi * xi;
    // 1 + x^2 + ... + x^(2m)
    let geometric = |m: i32| (0..=m).map(|p| x2.powi(p)).sum::<f64>();
    let f = match (params.coupling_order, params.placement, tag.equal_speeds) {
        (CouplingOrder::FirstOrder, Placement::Transversal, _) => x2.powi(3) / geometric(4),
        (CouplingOrder::FirstOrder, _, true) => x2.powi(2) / geometric(2),
        (CouplingOrder::FirstOrder, _, false) => x2.powi(2) / geometric(4),
        (CouplingOrder::ZeroOrder, Placement::Transversal, _) => x2.powi(4) / geometric(5),
        (CouplingOrder::ZeroOrder, _, true) => x2.powi(3) / geometric(3),
        (CouplingOrder::ZeroOrder, _, false) => x2.powi(3) / geometric(5),
    };
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use Component::*;

    fn unit_transversal() -> ModelParams {
        ModelParams::fourier(1.0, 1.0, 1.0, 1.0, 1.0, Placement::Transversal)
    }

    #[test]
    fn fourier_transversal_entries_at_xi_2() {
        let a = assemble_generator(&unit_transversal(), 2.0).unwrap();
        assert_eq!(a.at(U, V), C64::new(0.0, 2.0));
        assert_eq!(a.at(U, Eta), C64::new(0.0, -2.0));
        assert_eq!(a.at(Eta, Eta), C64::new(-4.0, 0.0));
        assert_eq!(a.at(Y, V), C64::new(-1.0, 0.0));
        assert_eq!(a.at(Eta, U), C64::new(0.0, -2.0));
    }

    #[test]
    fn only_zeroth_order_terms_survive_at_xi_0() {
        let p = ModelParams::fourier(2.5, 1.3, 0.7, 3.0, 1.1, Placement::Transversal);
        let a = assemble_generator(&p, 0.0).unwrap();
        let mut nonzero = vec![];
        for r in 0..7 {
            for c in 0..7 {
                if a.entries[(r, c)] != C64::new(0.0, 0.0) {
                    nonzero.push((r, c, a.entries[(r, c)].re));
                }
            }
        }
        assert_eq!(
            nonzero,
            vec![(0, 3, 1.0), (0, 5, 1.0), (3, 0, -2.5), (5, 0, -2.5)]
        );
    }

    #[test]
    fn cattaneo_heat_block() {
        let p = ModelParams::cattaneo(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, Placement::Transversal);
        let a = assemble_generator(&p, 1.0).unwrap();
        assert_eq!(a.dim(), 8);
        assert_eq!(a.at(Eta, Q), C64::new(0.0, -1.0));
        assert_eq!(a.at(Q, Eta), C64::new(0.0, -1.0));
        assert_eq!(a.at(Q, Q), C64::new(-1.0, 0.0));
        assert_eq!(a.at(Eta, Eta), C64::new(0.0, 0.0));
    }

    #[test]
    fn zero_order_coupling_entries() {
        let p = ModelParams::fourier(1.0, 2.0, 3.0, 1.0, 0.5, Placement::Rotation)
            .with_coupling_order(CouplingOrder::ZeroOrder);
        let a = assemble_generator(&p, 4.0).unwrap();
        assert_eq!(a.at(Y, Eta), C64::new(-0.5, 0.0));
        assert_eq!(a.at(Eta, Y), C64::new(0.5, 0.0));
        assert_eq!(a.at(U, Eta), C64::new(0.0, 0.0));
    }

    #[test]
    fn invalid_parameters_rejected() {
        let mut p = unit_transversal();
        p.k2 = 0.0;
        assert!(matches!(assemble_generator(&p, 1.0), Err(Error::InvalidParams(_))));
        let mut p = unit_transversal();
        p.gamma = 0.0;
        assert!(p.validate().is_err());
        let mut p = unit_transversal();
        p.k4 = -1.0;
        assert!(p.validate().is_err());
        // negative k4 is fine for Cattaneo, negative gamma for both
        let mut p = ModelParams::cattaneo(1.0, 2.0, 3.0, -1.0, 1.0, -2.0, Placement::Slip);
        assert!(p.validate().is_ok());
        p.k5 = None;
        assert!(p.validate().is_err());
    }

    #[test]
    fn weights() {
        let p = ModelParams::fourier(2.0, 3.0, 4.0, 1.0, 1.0, Placement::Rotation);
        assert_eq!(energy_weights(&p), vec![2.0, 1.0, 3.0, 1.0, 4.0, 1.0, 1.0]);
        let p = ModelParams::cattaneo(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, Placement::Rotation);
        assert_eq!(energy_weights(&p), vec![1.0; 8]);
    }

    #[test]
    fn decay_function_reference_values() {
        let tr = ModelParams::fourier(1.0, 1.0, 2.0, 1.0, 1.0, Placement::Transversal);
        assert_relative_eq!(decay_function(&tr, 1.0).unwrap(), 0.2, epsilon = 1e-15);
        let rot_eq = ModelParams::fourier(1.0, 1.0, 1.0, 1.0, 1.0, Placement::Rotation);
        assert_relative_eq!(decay_function(&rot_eq, 1.0).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        let rot_ne = ModelParams::fourier(1.0, 2.0, 3.0, 1.0, 1.0, Placement::Rotation);
        assert_relative_eq!(decay_function(&rot_ne, 1.0).unwrap(), 0.2, epsilon = 1e-15);
        for p in [tr, rot_eq, rot_ne] {
            assert_eq!(decay_function(&p, 0.0).unwrap(), 0.0);
        }
        let zo = tr.with_coupling_order(CouplingOrder::ZeroOrder);
        assert_relative_eq!(decay_function(&zo, 1.0).unwrap(), 1.0 / 6.0, epsilon = 1e-15);
        let zo_eq = rot_eq.with_coupling_order(CouplingOrder::ZeroOrder);
        assert_relative_eq!(decay_function(&zo_eq, 1.0).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn decay_function_undefined_when_non_decaying() {
        let p = unit_transversal();
        assert!(matches!(decay_function(&p, 1.0), Err(Error::Regime(_))));
    }

    #[test]
    fn classification() {
        let nd = ModelParams::fourier(3.0, 1.0, 1.0, 1.0, 1.0, Placement::Transversal);
        assert_eq!(classify(&nd).predicted_regime, Regime::NonDecaying);
        let em = ModelParams::fourier(2.0, 2.0, 2.0, 1.0, 1.0, Placement::Rotation);
        assert_eq!(classify(&em).predicted_regime, Regime::ExponentialMode);
        let rl = ModelParams::fourier(1.0, 1.0, 2.0, 1.0, 1.0, Placement::Transversal);
        let tag = classify(&rl);
        assert_eq!(tag.predicted_regime, Regime::RegularityLoss);
        assert_eq!(tag.k2_k3_gap, 1.0);
        // equal speeds with transversal coupling: still non-decaying (k2 = k3)
        let tr_eq = ModelParams::fourier(2.0, 2.0, 2.0, 1.0, 1.0, Placement::Transversal);
        assert_eq!(classify(&tr_eq).predicted_regime, Regime::NonDecaying);
        // zero-order coupling never gets the bounded-below high-frequency rate
        let zo = em.with_coupling_order(CouplingOrder::ZeroOrder);
        assert_eq!(classify(&zo).predicted_regime, Regime::RegularityLoss);
        // slip placement behaves like rotation
        let sl = ModelParams::cattaneo(1.5, 1.5, 1.5, 1.0, 1.0, 1.0, Placement::Slip);
        assert_eq!(classify(&sl).predicted_regime, Regime::ExponentialMode);
    }

    #[test]
    fn equality_uses_relative_tolerance() {
        let p = ModelParams::fourier(1.0, 1.0, 1.0 + 1e-12, 1.0, 1.0, Placement::Transversal);
        assert!(p.k2_eq_k3());
        let p = ModelParams::fourier(1.0, 1.0, 1.0 + 1e-8, 1.0, 1.0, Placement::Transversal);
        assert!(!p.k2_eq_k3());
    }
}
