//! Run configuration: a TOML file with a `[model]` table and one table per subcommand.

use serde::{Deserialize, Serialize};
use thermolam::decay::InitialProfile;
use thermolam::grid::{linspace, logspace};
use thermolam::lyapunov::Transcription;
use thermolam::model::DEFAULT_EQ_TOL;
use thermolam::quadrature::QuadSpec;
use thermolam::{Component, CouplingOrder, HeatLaw, ModelParams, Placement};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    #[serde(default)]
    pub k5: Option<f64>,
    pub gamma: f64,
    pub placement: Placement,
    #[serde(default = "default_law")]
    pub law: HeatLaw,
    #[serde(default = "default_order")]
    pub coupling_order: CouplingOrder,
    #[serde(default = "default_eq_tol")]
    pub eq_tol: f64,
}

fn default_law() -> HeatLaw {
    HeatLaw::Fourier
}

fn default_order() -> CouplingOrder {
    CouplingOrder::FirstOrder
}

fn default_eq_tol() -> f64 {
    DEFAULT_EQ_TOL
}

impl ModelConfig {
    pub fn params(&self) -> Result<ModelParams, CliError> {
        let p = ModelParams {
            k1: self.k1,
            k2: self.k2,
            k3: self.k3,
            k4: self.k4,
            k5: self.k5,
            gamma: self.gamma,
            placement: self.placement,
            law: self.law,
            coupling_order: self.coupling_order,
            eq_tol: self.eq_tol,
        };
        p.validate().map_err(|e| CliError::Config(format!("[model]: {e}")))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Either explicit `values`, or `n` points from `lo` to `hi`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn lin(lo: f64, hi: f64, n: usize) -> Self {
        GridSpec { values: vec![], lo: Some(lo), hi: Some(hi), n: Some(n), spacing: Spacing::Linear }
    }

    pub fn log(lo: f64, hi: f64, n: usize) -> Self {
        GridSpec { spacing: Spacing::Log, ..Self::lin(lo, hi, n) }
    }

    pub fn resolve(&self, what: &str) -> Result<Vec<f64>, CliError> {
        let bad = |m: String| Err(CliError::Config(format!("{what}: {m}")));
        let v = if !self.values.is_empty() {
            if self.lo.is_some() || self.hi.is_some() || self.n.is_some() {
                return bad("give either values or lo/hi/n, not both".into());
            }
            self.values.clone()
        } else {
            let (Some(lo), Some(hi), Some(n)) = (self.lo, self.hi, self.n) else {
                return bad("grid needs values or all of lo, hi, n".into());
            };
            if n == 0 {
                return bad("grid is empty".into());
            }
            if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
                return bad(format!("need finite lo <= hi, got [{lo}, {hi}]"));
            }
            match self.spacing {
                Spacing::Linear => linspace(lo, hi, n),
                Spacing::Log if lo > 0.0 => logspace(lo, hi, n),
                Spacing::Log => return bad(format!("log grid needs lo > 0, got {lo}")),
            }
        };
        if v.iter().any(|x| !x.is_finite()) {
            return bad("grid values must be finite".into());
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumBlock {
    pub xi: GridSpec,
}

impl Default for SpectrumBlock {
    fn default() -> Self {
        SpectrumBlock { xi: GridSpec::log(1e-2, 1e2, 60) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveBlock {
    pub xi: GridSpec,
    pub t: GridSpec,
    /// Components set to 1 in the initial state (ignored when `state_re` is given).
    pub components: Vec<Component>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub state_re: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub state_im: Vec<f64>,
}

impl Default for EvolveBlock {
    fn default() -> Self {
        EvolveBlock {
            xi: GridSpec { values: vec![1.0], ..GridSpec::default() },
            t: GridSpec::lin(0.0, 20.0, 201),
            components: vec![Component::U],
            state_re: vec![],
            state_im: vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundCheckBlock {
    pub xi: GridSpec,
    pub t: GridSpec,
    pub tolerance: f64,
}

impl Default for BoundCheckBlock {
    fn default() -> Self {
        BoundCheckBlock { xi: GridSpec::log(1e-2, 1e2, 60), t: GridSpec::lin(0.0, 50.0, 101), tolerance: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovBlock {
    pub xi: GridSpec,
    pub t: GridSpec,
    pub states_per_xi: usize,
    pub transcription: Transcription,
    /// Starting value of the energy multiplier; the default multipliers are used otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl Default for LyapunovBlock {
    fn default() -> Self {
        LyapunovBlock {
            xi: GridSpec::log(1e-2, 1e2, 40),
            t: GridSpec::lin(0.0, 20.0, 40),
            states_per_xi: 10,
            transcription: Transcription::default(),
            lambda: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeBlock {
    pub band_center: f64,
    #[serde(default = "default_band_width")]
    pub band_width: f64,
    pub t: GridSpec,
}

fn default_band_width() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayBlock {
    pub profile: InitialProfile,
    pub j: u32,
    pub ell: u32,
    pub t: GridSpec,
    pub window: [f64; 2],
    pub quad: QuadSpec,
    /// Rate of the exponential envelope tail; defaults to the smallest decay rate on `[1, 100]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ctilde0: Option<f64>,
    /// Fail with a verification exit code when the fitted slope exceeds this.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeBlock>,
}

impl Default for DecayBlock {
    fn default() -> Self {
        let mut t = vec![0.0, 1.0, 10.0];
        t.extend(logspace(1e2, 1e4, 12));
        DecayBlock {
            profile: InitialProfile::gaussian(1.0, 1.0, &[Component::U]),
            j: 0,
            ell: 1,
            t: GridSpec { values: t, ..GridSpec::default() },
            window: [1e2, 1e4],
            quad: QuadSpec::default(),
            ctilde0: None,
            max_slope: None,
            probe: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonstabilityBlock {
    pub xi: GridSpec,
    pub tolerance: f64,
}

impl Default for NonstabilityBlock {
    fn default() -> Self {
        let mut xi = vec![0.0];
        xi.extend(linspace(0.1, 50.0, 50));
        NonstabilityBlock { xi: GridSpec { values: xi, ..GridSpec::default() }, tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeIntegralCase {
    pub sigma: f64,
    pub p: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupCase {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmasBlock {
    pub t: GridSpec,
    pub time_integral: Vec<TimeIntegralCase>,
    pub sup: Vec<SupCase>,
}

impl Default for LemmasBlock {
    fn default() -> Self {
        let mut t = vec![0.0];
        t.extend(logspace(1e-3, 1e6, 400));
        let mut time_integral = Vec::new();
        for sigma in [0.0, 2.0, 4.0] {
            for p in [4.0, 6.0] {
                time_integral.push(TimeIntegralCase { sigma, p, r: 0.2 });
            }
        }
        let mut sup = Vec::new();
        for s1 in [2.0, 4.0, 6.0] {
            for s3 in [2.0, 4.0] {
                sup.push(SupCase { s1, s2: 0.2, s3 });
            }
        }
        LemmasBlock { t: GridSpec { values: t, ..GridSpec::default() }, time_integral, sup }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_check: Option<BoundCheckBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonstability: Option<NonstabilityBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemmas: Option<LemmasBlock>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        self.model.as_ref().ok_or_else(|| CliError::Config("missing [model] table".into()))?.params()
    }
}

/// A subcommand's table, or an error naming the missing table.
pub fn block<'a, T>(b: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    b.as_ref().ok_or_else(|| CliError::Config(format!("missing [{name}] table")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_model_with_defaults() {
        let c = RunConfig::parse(
            "seed = 3\n[model]\nk1 = 1.0\nk2 = 1.0\nk3 = 2.0\nk4 = 1.0\ngamma = 1.0\nplacement = \"transversal\"\n[spectrum]\n",
        )
        .unwrap();
        let p = c.params().unwrap();
        assert_eq!(p.law, HeatLaw::Fourier);
        assert_eq!(c.spectrum.unwrap().xi.resolve("xi").unwrap().len(), 60);
        assert_eq!(c.seed, 3);
    }

    #[test]
    fn rejects_unknown_keys_and_empty_grids() {
        assert!(RunConfig::parse("[model]\nk9 = 1.0\n").is_err());
        let g = GridSpec::lin(0.0, 1.0, 0);
        assert!(g.resolve("xi").is_err());
        let g = GridSpec { values: vec![1.0], n: Some(3), ..GridSpec::default() };
        assert!(g.resolve("xi").is_err());
        assert!(GridSpec::log(0.0, 1.0, 3).resolve("xi").is_err());
    }

    #[test]
    fn profile_table_round_trips() {
        let c = RunConfig::parse(
            "[decay]\nprofile = { family = \"gaussian_freq\", a = 1.0, b = 2.0, components = [\"u\", \"theta\"] }\n",
        )
        .unwrap();
        let d = c.decay.unwrap();
        assert_eq!(d.profile, InitialProfile::gaussian(1.0, 2.0, &[Component::U, Component::Theta]));
        let text = toml::to_string(&d).unwrap();
        let back: DecayBlock = toml::from_str(&text).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn invalid_model_is_a_config_error() {
        let c = RunConfig::parse(
            "[model]\nk1 = -1.0\nk2 = 1.0\nk3 = 2.0\nk4 = 1.0\ngamma = 1.0\nplacement = \"transversal\"\n",
        )
        .unwrap();
        assert!(matches!(c.params(), Err(CliError::Config(_))));
    }
}
