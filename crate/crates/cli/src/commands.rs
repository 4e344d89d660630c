use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use regen_core::bounds::{
    bound_report, exponential_rate, lorden_xi, optimize_theta, optimize_theta_upsilon,
    success_prob, upsilon_terms, BoundParameters, SeriesForm,
};
use regen_core::coupling::ParallelCoupling;
use regen_core::distributions::LifetimeModel;
use regen_core::renewal::{simulate_renewal, write_paths_csv};
use regen_core::stream::substream;
use regen_core::verify::{verify_polynomial_bound, VerifyConfig, DEFAULT_BINS};

use crate::config::{parse_model, require, AutoOr, ConfigError, TimeGrid};
use crate::{BoundArgs, CoupleArgs, Failure, Objective, SimulateArgs, TimeUnit, VerifyArgs};

const DEFAULT_BOUND_GRID: &str = "log:1:10000:41";
const DEFAULT_VERIFY_GRID: &str = "1,2,5,10,20,50";
const DEFAULT_HORIZON: f64 = 1e4;

fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), Failure> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn series_form(strict: Option<bool>) -> SeriesForm {
    if strict.unwrap_or(false) {
        SeriesForm::Strict
    } else {
        SeriesForm::Printed
    }
}

fn positive_grid(grid: &TimeGrid, name: &str) -> Result<(), ConfigError> {
    if grid.0.first().is_some_and(|&t| t <= 0.0) {
        return Err(ConfigError::field(name, "times must be positive"));
    }
    Ok(())
}

fn at_least(value: usize, min: usize, name: &str) -> Result<usize, ConfigError> {
    if value < min {
        return Err(ConfigError::field(
            name,
            format!("must be at least {min}, got {value}"),
        ));
    }
    Ok(value)
}

struct ThetaChoice {
    theta: AutoOr,
    theta_max: Option<f64>,
    objective: Objective,
    ell: u32,
    b: f64,
    form: SeriesForm,
}

fn resolve_params(model: &LifetimeModel, c: &ThetaChoice) -> Result<BoundParameters, Failure> {
    Ok(match c.theta {
        AutoOr::Value(theta) => success_prob(model, theta)?,
        AutoOr::Auto => {
            let theta_max = match c.theta_max {
                Some(t) => t,
                None => 20.0 * lorden_xi(model)?,
            };
            match c.objective {
                Objective::Kappa => optimize_theta(model, theta_max)?.1,
                Objective::Upsilon => {
                    optimize_theta_upsilon(model, c.ell, c.b, theta_max, c.form)?.1
                }
            }
        }
    })
}

pub fn bound(a: BoundArgs) -> Result<(), Failure> {
    let model = parse_model(&a.dist)?;
    let ell = a.ell.unwrap_or(2);
    at_least(ell as usize, 1, "ell")?;
    let b = a.b.unwrap_or(0.0);
    let b_prime = a.b_prime.unwrap_or(0.0);
    let form = series_form(a.strict_series);
    let grid = match a.t_grid {
        Some(g) => g,
        None => DEFAULT_BOUND_GRID.parse().expect("default grid parses"),
    };
    positive_grid(&grid, "t-grid")?;
    let params = resolve_params(
        &model,
        &ThetaChoice {
            theta: a.theta.unwrap_or(AutoOr::Auto),
            theta_max: a.theta_max,
            objective: a.optimize.unwrap_or(Objective::Kappa),
            ell,
            b,
            form,
        },
    )?;
    let report = bound_report(&model, ell, b, b_prime, params, form, &grid.0)?;
    let mut out = serde_json::to_value(&report).map_err(io::Error::from)?;
    let obj = out.as_object_mut().expect("report is an object");
    obj.insert(
        "dist".into(),
        serde_json::to_value(model.spec()).map_err(io::Error::from)?,
    );
    if let Some(alpha) = a.alpha {
        let exp = exponential_rate(&model, b, b_prime, params, alpha, &grid.0)?;
        obj.insert(
            "exponential".into(),
            serde_json::to_value(exp).map_err(io::Error::from)?,
        );
    }
    write_json(&out, a.out.as_deref())
}

pub fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let model = parse_model(&a.dist)?;
    let times = require(&a.t, "t")?;
    let seed = require(&a.seed, "seed")?;
    let n = at_least(a.paths.unwrap_or(1000), 1, "paths")?;
    let b = a.b.unwrap_or(0.0);
    let horizon = times
        .0
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(f64::MIN_POSITIVE);
    let paths = (0..n)
        .into_par_iter()
        .map(|i| simulate_renewal(&model, b, horizon, &mut substream(seed, i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = sink(a.out.as_deref())?;
    writeln!(out, "path_id,t,overshoot")?;
    for (id, path) in paths.iter().enumerate() {
        for &t in &times.0 {
            writeln!(out, "{id},{t},{}", path.overshoot_at(t)?)?;
        }
    }
    out.flush()?;
    if let Some(p) = a.paths_csv.as_deref() {
        let mut w = BufWriter::new(File::create(p)?);
        write_paths_csv(&paths, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CoupleSummary {
    n_traces: usize,
    n_censored: usize,
    censor_rate: f64,
    /// Mean over uncensored traces.
    tau_mean: Option<f64>,
    /// Median with censored traces at `+∞` (null if it falls among them).
    tau_median: Option<f64>,
    t1_mean: f64,
    attempts_mean: f64,
    horizon: f64,
    seed: u64,
    params: BoundParameters,
    /// `Υ(ℓ = 1, b, b′, Θ)`, a bound on `E τ`.
    upsilon_1: f64,
}

pub fn couple(a: CoupleArgs) -> Result<(), Failure> {
    let model = parse_model(&a.dist)?;
    let seed = require(&a.seed, "seed")?;
    let n = at_least(a.traces.unwrap_or(10_000), 1, "traces")?;
    let b = a.b.unwrap_or(0.0);
    let b_prime = a.b_prime.unwrap_or(0.0);
    let horizon = a.horizon.unwrap_or(DEFAULT_HORIZON);
    if !(horizon > 0.0) {
        return Err(ConfigError::field("horizon", "must be positive").into());
    }
    let params = resolve_params(
        &model,
        &ThetaChoice {
            theta: a.theta.unwrap_or(AutoOr::Auto),
            theta_max: a.theta_max,
            objective: Objective::Kappa,
            ell: 1,
            b,
            form: SeriesForm::Printed,
        },
    )?;
    let sim = ParallelCoupling::new(&model, b, b_prime, params.theta, horizon)?
        .shared_first_gap(a.shared_first_gap.unwrap_or(false));
    let traces = sim.batch(n, seed)?;

    let mut taus: Vec<f64> = traces
        .iter()
        .map(|t| t.tau.unwrap_or(f64::INFINITY))
        .collect();
    let done: Vec<f64> = taus.iter().copied().filter(|t| t.is_finite()).collect();
    taus.sort_by(f64::total_cmp);
    let median = taus[(n - 1) / 2];
    let summary = CoupleSummary {
        n_traces: n,
        n_censored: n - done.len(),
        censor_rate: (n - done.len()) as f64 / n as f64,
        tau_mean: (!done.is_empty()).then(|| done.iter().sum::<f64>() / done.len() as f64),
        tau_median: median.is_finite().then_some(median),
        t1_mean: traces.iter().map(|t| t.t1).sum::<f64>() / n as f64,
        attempts_mean: traces.iter().map(|t| t.attempts.len() as f64).sum::<f64>() / n as f64,
        horizon,
        seed,
        params,
        upsilon_1: upsilon_terms(&model, 1, b, b_prime, &params, SeriesForm::Printed)?.value(),
    };

    let mut out = sink(a.out.as_deref())?;
    for trace in &traces {
        serde_json::to_writer(&mut out, trace).map_err(io::Error::from)?;
        writeln!(out)?;
    }
    out.flush()?;
    let text = serde_json::to_string_pretty(&summary).map_err(io::Error::from)?;
    match (a.summary.as_deref(), a.out.is_some()) {
        (Some(p), _) => std::fs::write(p, text + "\n")?,
        (None, true) => println!("{text}"),
        (None, false) => eprintln!("{text}"),
    }
    Ok(())
}

pub fn verify(a: VerifyArgs) -> Result<(), Failure> {
    let model = parse_model(&a.dist)?;
    let seed = require(&a.seed, "seed")?;
    let ell = a.ell.unwrap_or(2);
    at_least(ell as usize, 1, "ell")?;
    let b = a.b.unwrap_or(0.0);
    let form = series_form(a.strict_series);
    let n_paths = at_least(a.paths.unwrap_or(100_000), 1, "paths")?;
    let n_bins = at_least(a.bins.unwrap_or(DEFAULT_BINS), 2, "bins")?;
    let scale = a.inject_bound_scale.unwrap_or(1.0);
    if !(scale > 0.0) {
        return Err(ConfigError::field("inject-bound-scale", "must be positive").into());
    }
    let mut grid = match a.t_grid {
        Some(g) => g,
        None => DEFAULT_VERIFY_GRID.parse().expect("default grid parses"),
    };
    positive_grid(&grid, "t-grid")?;
    if a.t_unit == Some(TimeUnit::Mean) {
        let mean = model.mean();
        grid.0.iter_mut().for_each(|t| *t *= mean);
    }
    let params = resolve_params(
        &model,
        &ThetaChoice {
            theta: a.theta.unwrap_or(AutoOr::Auto),
            theta_max: a.theta_max,
            objective: a.optimize.unwrap_or(Objective::Kappa),
            ell,
            b,
            form,
        },
    )?;
    let config = VerifyConfig {
        b,
        ell,
        theta: params.theta,
        series_form: form,
        t_grid: grid.0,
        n_paths,
        n_bins,
        seed,
        bound_scale: scale,
    };
    let report = verify_polynomial_bound(&model, &config)?;
    let mut json = serde_json::to_value(&report).map_err(io::Error::from)?;
    json.as_object_mut().expect("report is an object").insert(
        "dist".into(),
        serde_json::to_value(model.spec()).map_err(io::Error::from)?,
    );
    write_json::<Value>(&json, a.out_json.as_deref())?;
    if let Some(p) = a.out_csv.as_deref() {
        let mut w = BufWriter::new(File::create(p)?);
        report.write_csv(&mut w)?;
        w.flush()?;
    }
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}
