//! One function per subcommand. Each writes its files and returns a one-line summary.

use serde::Serialize;
use thermolam::decay::{
    decay_curve, envelope, fit_envelope, fit_exponent, lemma_sup_check, lemma_time_integral_check,
    regularity_loss_probe, EnvelopeFit, ProbeReport, SupReport, TimeIntegralReport,
};
use thermolam::evolution::{pointwise_bound_check, trajectory, BoundCheckReport};
use thermolam::lyapunov::{
    decay_inequality_check, default_multipliers, DecayCheckReport, LyapunovConfig,
};
use thermolam::spectral::{abscissa_scan, highfreq_abscissa_slope, imaginary_eigen_check, spectrum};
use thermolam::{classify, Component, Error, ModelParams, Regime, StateVector, C64};

use crate::config::{block, RunConfig};
use crate::error::CliError;
use crate::output::{float, Table, Writer};

fn require_decaying(p: &ModelParams) -> Result<(), CliError> {
    if classify(p).predicted_regime == Regime::NonDecaying {
        return Err(Error::Regime(
            "transversal coupling with k2 = k3 has a purely imaginary eigenvalue at every frequency; \
             the solution does not decay"
                .into(),
        )
        .into());
    }
    Ok(())
}

pub fn spectrum_cmd(cfg: &RunConfig, out: &Writer) -> Result<String, CliError> {
    let p = cfg.params()?;
    let xi = block(&cfg.spectrum, "spectrum")?.xi.resolve("spectrum.xi")?;
    let samples = abscissa_scan(&p, &xi)?;
    let n = p.dim();
    let mut header = vec!["xi".to_string(), "abscissa".to_string()];
    header.extend((1..=n).map(|k| format!("eig_re_{k}")));
    header.extend((1..=n).map(|k| format!("eig_im_{k}")));
    let mut table = Table::new(header);
    for s in &samples {
        let mut row = vec![s.xi, s.abscissa];
        row.extend(s.eigenvalues.iter().map(|z| z.re));
        row.extend(s.eigenvalues.iter().map(|z| z.im));
        table.push_floats(&row);
    }
    let path = out.csv("spectrum.csv", &table)?;
    let max = samples.iter().map(|s| s.abscissa).fold(f64::NEG_INFINITY, f64::max);
    Ok(format!("{} frequencies, max abscissa {}, wrote {}", samples.len(), float(max), path.display()))
}

fn initial_state(p: &ModelParams, re: &[f64], im: &[f64], comps: &[Component]) -> Result<StateVector, CliError> {
    let n = p.dim();
    if !re.is_empty() {
        if re.len() != n || !(im.is_empty() || im.len() == n) {
            return Err(CliError::Config(format!("state_re/state_im must have {n} entries")));
        }
        let get_im = |k: usize| im.get(k).copied().unwrap_or(0.0);
        let v: Vec<C64> = (0..n).map(|k| C64::new(re[k], get_im(k))).collect();
        return Ok(StateVector::from_slice(&v));
    }
    if comps.is_empty() {
        return Err(CliError::Config("evolve needs components or state_re".into()));
    }
    let mut u = StateVector::zeros(n);
    for c in comps {
        if c.idx() >= n {
            return Err(CliError::Config(format!("component {} does not exist for this heat law", c.name())));
        }
        u.0[c.idx()] = C64::new(1.0, 0.0);
    }
    Ok(u)
}

pub fn evolve_cmd(cfg: &RunConfig, out: &Writer) -> Result<String, CliError> {
    let p = cfg.params()?;
    let b = block(&cfg.evolve, "evolve")?;
    let xi = b.xi.resolve("evolve.xi")?;
    let t = b.t.resolve("evolve.t")?;
    let u0 = initial_state(&p, &b.state_re, &b.state_im, &b.components)?;
    let comps = &Component::ALL[..p.dim()];
    let mut header: Vec<String> = ["xi", "t", "energy", "norm"].iter().map(|s| s.to_string()).collect();
    for c in comps {
        header.push(format!("{}_re", c.name()));
        header.push(format!("{}_im", c.name()));
    }
    let mut table = Table::new(header);
    for &x in &xi {
        let tr = trajectory(&p, x, &u0, &t)?;
        for ((tk, s), e) in tr.times.iter().zip(&tr.states).zip(&tr.energies) {
            let mut row = vec![x, *tk, *e, s.norm()];
            for z in s.0.iter() {
                row.push(z.re);
                row.push(z.im);
            }
            table.push_floats(&row);
        }
    }
    let path = out.csv("evolve.csv", &table)?;
    Ok(format!("{} rows, wrote {}", table.rows.len(), path.display()))
}

#[derive(Serialize)]
struct BoundCheckOut {
    tolerance: f64,
    passed: bool,
    #[serde(flatten)]
    report: BoundCheckReport,
}

pub fn bound_check_cmd(cfg: &RunConfig, out: &Writer) -> Result<String, CliError> {
    let p = cfg.params()?;
    let b = block(&cfg.bound_check, "bound_check")?;
    require_decaying(&p)?;
    let xi = b.xi.resolve("bound_check.xi")?;
    let t = b.t.resolve("bound_check.t")?;
    let report = pointwise_bound_check(&p, &xi, &t)?;
    let passed = report.c_fit > 0.0 && report.worst_violation <= b.tolerance;
    let msg = format!(
        "c_fit {} ctilde_fit {} worst_violation {}",
        float(report.c_fit),
        float(report.ctilde_fit),
        float(report.worst_violation)
    );
    out.json("bound_check.json", &BoundCheckOut { tolerance: b.tolerance, passed, report })?;
    if passed {
        Ok(msg)
    } else {
        Err(CliError::Failed(format!("{msg} exceeds tolerance {}", b.tolerance)))
    }
}

#[derive(Serialize)]
struct LyapunovOut {
    multipliers: LyapunovConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    check: Option<DecayCheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn lyapunov_cmd(cfg: &RunConfig, out: &Writer) -> Result<String, CliError> {
    let p = cfg.params()?;
    let b = block(&cfg.lyapunov, "lyapunov")?;
    require_decaying(&p)?;
    let xi = b.xi.resolve("lyapunov.xi")?;
    let t = b.t.resolve("lyapunov.t")?;
    let mut multipliers = default_multipliers(&p)?.with_transcription(b.transcription);
    if let Some(l) = b.lambda {
        multipliers = multipliers.with_lambda(l);
    }
    match decay_inequality_check(&p, &multipliers, &xi, &t, b.states_per_xi, cfg.seed) {
        Ok(report) => {
            let msg = format!(
                "lambda {} c_fit {} worst_margin {} c3 {}",
                report.lambda_used,
                float(report.c_fit),
                float(report.worst_margin),
                float(report.c3)
            );
            out.json(
                "lyapunov.json",
                &LyapunovOut { multipliers, check: Some(report), error: None },
            )?;
            Ok(msg)
        }
        Err(e @ Error::Verification(_)) => {
            out.json(
                "lyapunov.json",
                &LyapunovOut { multipliers, check: None, error: Some(e.to_string()) },
            )?;
            Err(e.into())
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct DecayOut {
    slope: f64,
    window: [f64; 2],
    ctilde0: f64,
    envelope: EnvelopeFit,
    #[serde(skip_serializing_if = "Option::is_none")]
    probe: Option<ProbeReport>,
}

pub fn decay_cmd(cfg: &RunConfig, out: &Writer) -> Result<String, CliError> {
    let p = cfg.params()?;
    let b = block(&cfg.decay, "decay")?;
    require_decaying(&p)?;
    let t = b.t.resolve("decay.t")?;
    let curve = decay_curve(&p, &b.profile, b.j, &t, &b.quad)?;
    let slope = fit_exponent(&curve, (b.window[0], b.window[1]))?;
    let ctilde0 = match b.ctilde0 {
        Some(c) => c,
        None => highfreq_abscissa_slope(&p, 1.0, 100.0, 20)?.min_decay_rate,
    };
    let fit = fit_envelope(&curve, b.ell, ctilde0)?;
    let mut table = Table::new(vec!["t".into(), "norm".into(), "envelope".into()]);
    for (&tk, &v) in curve.times.iter().zip(&curve.values) {
        table.push_floats(&[tk, v, envelope(&p, &b.profile, b.j, b.ell, tk, fit.c0, ctilde0)?]);
    }
    let probe = match &b.probe {
        Some(pb) => Some(regularity_loss_probe(&p, pb.band_center, pb.band_width, &pb.t.resolve("decay.probe.t")?)?),
        None => None,
    };
    out.csv("decay.csv", &table)?;
    out.json("decay.json", &DecayOut { slope, window: b.window, ctilde0, envelope: fit, probe })?;
    let msg = format!("slope {} c0 {}", float(slope), float(fit.c0));
    match b.max_slope {
        Some(m) if slope > m => Err(CliError::Failed(format!("{msg}: slope above {m}"))),
        _ => Ok(msg),
    }
}

#[derive(Serialize)]
struct NonstabilityOut {
    all_found: bool,
    worst_residual: f64,
    worst_abs_abscissa: f64,
}

pub fn nonstability_cmd(cfg: &RunConfig, out: &Writer) -> Result<String, CliError> {
    let p = cfg.params()?;
    let b = block(&cfg.nonstability, "nonstability")?;
    let xi = b.xi.resolve("nonstability.xi")?;
    let mut table = Table::new(
        ["xi", "lambda_re", "lambda_im", "residual", "found", "abscissa"].iter().map(|s| s.to_string()).collect(),
    );
    let mut rep = NonstabilityOut { all_found: true, worst_residual: 0.0, worst_abs_abscissa: 0.0 };
    for &x in &xi {
        let r = imaginary_eigen_check(&p, x, b.tolerance)?;
        let a = spectrum(&p, x)?.abscissa;
        rep.all_found &= r.found;
        rep.worst_residual = rep.worst_residual.max(r.residual);
        rep.worst_abs_abscissa = rep.worst_abs_abscissa.max(a.abs());
        table.push_floats(&[x, r.lambda.re, r.lambda.im, r.residual, if r.found { 1.0 } else { 0.0 }, a]);
    }
    out.csv("nonstability.csv", &table)?;
    out.json("nonstability.json", &rep)?;
    let msg = format!("worst residual {}, worst |abscissa| {}", float(rep.worst_residual), float(rep.worst_abs_abscissa));
    if rep.all_found {
        Ok(msg)
    } else {
        Err(CliError::Failed(format!("no purely imaginary eigenvalue at some frequency; {msg}")))
    }
}

#[derive(Serialize)]
struct LemmasOut {
    passed: bool,
    time_integral: Vec<TimeIntegralReport>,
    sup: Vec<SupReport>,
}

pub fn lemmas_cmd(cfg: &RunConfig, out: &Writer) -> Result<String, CliError> {
    let b = block(&cfg.lemmas, "lemmas")?;
    let t = b.t.resolve("lemmas.t")?;
    let time_integral = b
        .time_integral
        .iter()
        .map(|c| lemma_time_integral_check(c.sigma, c.p, c.r, &t))
        .collect::<Result<Vec<_>, _>>()?;
    let sup = b.sup.iter().map(|c| lemma_sup_check(c.s1, c.s2, c.s3, &t)).collect::<Result<Vec<_>, _>>()?;
    let passed = time_integral.iter().all(|r| r.passed) && sup.iter().all(|r| r.passed);
    let n = time_integral.len() + sup.len();
    out.json("lemmas.json", &LemmasOut { passed, time_integral, sup })?;
    if passed {
        Ok(format!("{n} lemma checks passed"))
    } else {
        Err(CliError::Failed("a lemma check failed; see lemmas.json".into()))
    }
}
