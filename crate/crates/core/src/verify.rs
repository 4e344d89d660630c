//! Monte Carlo checks of the analytic bounds.
//!
//! The total-variation distance between the law of `B_t` and `F̃` is
//! estimated on bins of equal stationary mass (edges at `F̃`-quantiles). A
//! binned TV never exceeds the true one, so the discretization only weakens
//! the check on the safe side. The Monte Carlo half-width
//! `3 sqrt(n_bins / (4 n))` bounds `E Σ|p̂_k − π_k| / 2` by Cauchy–Schwarz.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    polynomial_rate_curve, success_prob, upsilon_integrated_terms, BoundParameters, SeriesForm,
};
use crate::coupling::{CouplingFault, ParallelCoupling, TauSample};
use crate::distributions::{stationary_overshoot, DerivedModel, Lifetime, LifetimeModel};
use crate::error::{Error, Result};
use crate::renewal::{overshoots_on_grid, RenewalPath};
use crate::stats::{binomial_se, ks_critical_two_sample, ks_two_sample, mean_and_se};
use crate::stream::{substream, UniformSource};

pub const DEFAULT_BINS: usize = 50;
/// Salt separating plain reference paths from coupled traces of the same seed.
const PLAIN_STREAM_SALT: u64 = 0x5e_ed0f_9a1e_3c75;

/// Bin edges `e_0 = 0 < … < e_n = ∞` with `F̃(e_k) = k/n`, and the masses `π_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryBins {
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
}

impl StationaryBins {
    pub fn new(reference: &DerivedModel, n_bins: usize) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::Domain(format!("need at least 2 bins, got {n_bins}")));
        }
        let mut edges = Vec::with_capacity(n_bins + 1);
        edges.push(0.0);
        for k in 1..n_bins {
            edges.push(reference.quantile(k as f64 / n_bins as f64)?);
        }
        edges.push(f64::INFINITY);
        let masses = bin_masses(reference, &edges);
        Ok(StationaryBins { edges, masses })
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Relative frequencies of `samples` over the bins.
    pub fn histogram(&self, samples: &[f64]) -> Vec<f64> {
        let mut counts = vec![0usize; self.len()];
        let inner = &self.edges[1..self.edges.len() - 1];
        for &x in samples {
            counts[inner.partition_point(|&e| e <= x)] += 1;
        }
        let n = samples.len().max(1) as f64;
        counts.into_iter().map(|c| c as f64 / n).collect()
    }
}

fn bin_masses(reference: &DerivedModel, edges: &[f64]) -> Vec<f64> {
    edges
        .windows(2)
        .map(|w| reference.cdf(w[1]) - reference.cdf(w[0]))
        .collect()
}

/// Binned law of `B_t` from `n_paths` paths started at age `b`.
pub fn empirical_overshoot_hist(
    model: &LifetimeModel,
    b: f64,
    t: f64,
    n_paths: usize,
    n_bins: usize,
    seed: u64,
) -> Result<(Vec<f64>, StationaryBins)> {
    if n_paths < 1000 || n_bins < 10 {
        return Err(Error::Domain(format!(
            "need at least 1000 paths and 10 bins, got {n_paths} and {n_bins}"
        )));
    }
    let bins = StationaryBins::new(&stationary_overshoot(model)?, n_bins)?;
    let samples = overshoots_on_grid(model, b, &[t], n_paths, seed)?;
    Ok((bins.histogram(&samples[0]), bins))
}

/// `(½ Σ|p̂_k − π_k|, 3 sqrt(n_bins / (4 n_paths)))` with `π_k` from `reference`.
pub fn empirical_tv(
    hist: &[f64],
    reference: &DerivedModel,
    edges: &[f64],
    n_paths: usize,
) -> Result<(f64, f64)> {
    if edges.len() != hist.len() + 1 {
        return Err(Error::Internal(format!(
            "{} bins need {} edges, got {}",
            hist.len(),
            hist.len() + 1,
            edges.len()
        )));
    }
    tv_against(hist, &bin_masses(reference, edges), n_paths)
}

fn tv_against(hist: &[f64], masses: &[f64], n_paths: usize) -> Result<(f64, f64)> {
    let total: f64 = masses.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Internal(format!(
            "reference bin masses sum to {total}"
        )));
    }
    let tv = 0.5
        * hist
            .iter()
            .zip(masses)
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>();
    let band = 3.0 * (hist.len() as f64 / (4.0 * n_paths as f64)).sqrt();
    Ok((tv.clamp(0.0, 1.0), band))
}

/// Estimated `‖P_t^b − F̃‖_TV` along a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvCurveEstimate {
    pub t_grid: Vec<f64>,
    pub tv_hat: Vec<f64>,
    pub mc_band: Vec<f64>,
    pub n_paths: usize,
    pub n_bins: usize,
}

/// TV estimates at every grid time; each path is simulated once to the last time.
pub fn tv_curve(
    model: &LifetimeModel,
    b: f64,
    t_grid: &[f64],
    n_paths: usize,
    n_bins: usize,
    seed: u64,
) -> Result<TvCurveEstimate> {
    check_grid(t_grid)?;
    let bins = StationaryBins::new(&stationary_overshoot(model)?, n_bins)?;
    let samples = overshoots_on_grid(model, b, t_grid, n_paths, seed)?;
    let (tv_hat, mc_band) = samples
        .iter()
        .map(|s| tv_against(&bins.histogram(s), &bins.masses, n_paths))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok(TvCurveEstimate {
        t_grid: t_grid.to_vec(),
        tv_hat,
        mc_band,
        n_paths,
        n_bins,
    })
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::Domain(
            "time grid must be nonempty, positive and finite".into(),
        ));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "time grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Settings of a polynomial-bound verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub b: f64,
    pub ell: u32,
    pub theta: f64,
    pub series_form: SeriesForm,
    pub t_grid: Vec<f64>,
    pub n_paths: usize,
    pub n_bins: usize,
    pub seed: u64,
    /// Multiplier applied to `Υ̃` (1 for a genuine check).
    pub bound_scale: f64,
}

/// Verdict at one grid time: pass iff `tv_hat − band ≤ bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TvRecord {
    pub t: f64,
    pub tv_hat: f64,
    pub band: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub records: Vec<TvRecord>,
    pub pass: bool,
    pub family: String,
    pub params: BoundParameters,
    pub upsilon_tilde: f64,
    pub config: VerifyConfig,
}

impl VerificationReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,tv_hat,band,bound,pass")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.t, r.tv_hat, r.band, r.bound, r.pass
            )?;
        }
        Ok(())
    }
}

/// Check `‖P_t^b − F̃‖_TV ≤ min(1, Υ̃/tˡ)` along the grid.
pub fn verify_polynomial_bound(
    model: &LifetimeModel,
    config: &VerifyConfig,
) -> Result<VerificationReport> {
    let params = success_prob(model, config.theta)?;
    let upsilon_tilde =
        upsilon_integrated_terms(model, config.ell, config.b, &params, config.series_form)?.value();
    let curve = tv_curve(
        model,
        config.b,
        &config.t_grid,
        config.n_paths,
        config.n_bins,
        config.seed,
    )?;
    let records = curve
        .t_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let bound = polynomial_rate_curve(config.bound_scale * upsilon_tilde, config.ell, t)?;
            let (tv_hat, band) = (curve.tv_hat[i], curve.mc_band[i]);
            Ok(TvRecord {
                t,
                tv_hat,
                band,
                bound,
                pass: tv_hat - band <= bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport {
        pass: records.iter().all(|r| r.pass),
        records,
        family: model.family().to_string(),
        params,
        upsilon_tilde,
        config: config.clone(),
    })
}

/// `φ` in `P(τ ≥ t) ≤ E φ(τ) / φ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PhiKind {
    Power { ell: u32 },
    Exponential { beta: f64 },
}

impl PhiKind {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            PhiKind::Power { ell } => t.powi(ell as i32),
            PhiKind::Exponential { beta } => (beta * t).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRecord {
    pub t: f64,
    pub tail_hat: f64,
    pub se: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub records: Vec<TailRecord>,
    pub pass: bool,
    pub n_samples: usize,
    pub n_censored: usize,
}

/// Check the empirical `P(τ > t)` against `min(1, C/φ(t)) + 3 se`.
///
/// Censored samples count as exceeding every `t`.
pub fn verify_tau_tail(
    samples: &[TauSample],
    phi: PhiKind,
    bound_constant: f64,
    t_grid: &[f64],
) -> Result<TailReport> {
    if samples.len() < 1000 {
        return Err(Error::Domain(format!(
            "need at least 1000 samples, got {}",
            samples.len()
        )));
    }
    check_grid(t_grid)?;
    let n = samples.len();
    let mut taus: Vec<f64> = samples
        .iter()
        .map(|s| if s.censored { f64::INFINITY } else { s.tau })
        .collect();
    taus.sort_by(f64::total_cmp);
    let records: Vec<TailRecord> = t_grid
        .iter()
        .map(|&t| {
            let tail_hat = (n - taus.partition_point(|&x| x <= t)) as f64 / n as f64;
            let se = binomial_se(tail_hat, n);
            let bound = (bound_constant / phi.eval(t)).min(1.0);
            TailRecord {
                t,
                tail_hat,
                se,
                bound,
                pass: tail_hat <= bound + 3.0 * se,
            }
        })
        .collect();
    Ok(TailReport {
        pass: records.iter().all(|r| r.pass),
        records,
        n_samples: n,
        n_censored: samples.iter().filter(|s| s.censored).count(),
    })
}

/// `(Ê φ(τ), se)`; `+∞` if any sample is censored.
pub fn phi_moment_estimate(samples: &[TauSample], phi: PhiKind) -> (f64, f64) {
    if samples.iter().any(|s| s.censored) {
        return (f64::INFINITY, f64::INFINITY);
    }
    let values: Vec<f64> = samples.iter().map(|s| phi.eval(s.tau)).collect();
    mean_and_se(&values)
}

/// Coupling times with `b′` drawn from `F̃` independently for each trace.
pub fn stationary_coupling_times(
    model: &LifetimeModel,
    b: f64,
    theta: f64,
    n: usize,
    horizon: f64,
    seed: u64,
) -> Result<Vec<TauSample>> {
    let stationary = stationary_overshoot(model)?;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let b_prime = stationary.sample(rng.next_uniform());
            let trace = ParallelCoupling::new(model, b, b_prime, theta, horizon)?.run(&mut rng)?;
            Ok(TauSample {
                tau: trace.tau.unwrap_or(f64::INFINITY),
                censored: trace.censored(),
            })
        })
        .collect()
}

/// Settings of a coupled-marginal check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalConfig {
    pub b: f64,
    pub b_prime: f64,
    pub theta: f64,
    pub checkpoints: Vec<f64>,
    pub n_traces: usize,
    pub horizon: f64,
    pub seed: u64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalRecord {
    pub t: f64,
    /// KS distance between the coupled `B_t` and a plain copy started at `b`.
    pub ks: f64,
    /// Same for `B′_t` against a plain copy started at `b′`.
    pub ks_prime: f64,
    pub critical: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalReport {
    pub records: Vec<MarginalRecord>,
    pub pass: bool,
    pub n_censored: usize,
    pub config: MarginalConfig,
}

/// Two-sample KS test of both coupled coordinates against independent
/// plain renewal processes at every checkpoint.
pub fn verify_coupling_marginals(
    model: &LifetimeModel,
    config: &MarginalConfig,
    fault: Option<CouplingFault>,
) -> Result<MarginalReport> {
    check_grid(&config.checkpoints)?;
    let until = *config.checkpoints.last().expect("grid is nonempty");
    if config.horizon < until {
        return Err(Error::Domain(format!(
            "horizon {} precedes the last checkpoint {until}",
            config.horizon
        )));
    }
    let sim = ParallelCoupling::new(
        model,
        config.b,
        config.b_prime,
        config.theta,
        config.horizon,
    )?
    .record_paths_until(until)
    .with_fault(fault);
    let coupled = (0..config.n_traces)
        .into_par_iter()
        .map(|i| {
            let trace = sim.run_seeded(config.seed, i as u64)?;
            let paths = trace.paths.expect("paths are recorded");
            let path = RenewalPath::try_from((config.b, paths.epochs, until))?;
            let path_prime = RenewalPath::try_from((config.b_prime, paths.epochs_prime, until))?;
            let row = config
                .checkpoints
                .iter()
                .map(|&t| Ok((path.overshoot_at(t)?, path_prime.overshoot_at(t)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok((row, trace.tau.is_none()))
        })
        .collect::<Result<Vec<_>>>()?;
    let plain_seed = config.seed ^ PLAIN_STREAM_SALT;
    let plain = overshoots_on_grid(
        model,
        config.b,
        &config.checkpoints,
        config.n_traces,
        plain_seed,
    )?;
    let plain_prime = overshoots_on_grid(
        model,
        config.b_prime,
        &config.checkpoints,
        config.n_traces,
        plain_seed.rotate_left(17),
    )?;
    let critical = ks_critical_two_sample(config.n_traces, config.n_traces, config.alpha);
    let records: Vec<MarginalRecord> = config
        .checkpoints
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = coupled.iter().map(|(row, _)| row[j]).unzip();
            let ks = ks_two_sample(&xs, &plain[j]);
            let ks_prime = ks_two_sample(&ys, &plain_prime[j]);
            MarginalRecord {
                t,
                ks,
                ks_prime,
                critical,
                pass: ks < critical && ks_prime < critical,
            }
        })
        .collect();
    Ok(MarginalReport {
        pass: records.iter().all(|r| r.pass),
        records,
        n_censored: coupled.iter().filter(|(_, c)| *c).count(),
        config: config.clone(),
    })
}

/// Empirical Lorden check `Ê B_t ≤ Ξ + 3 se` for a zero-delay start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LordenCheck {
    pub t: f64,
    pub mean: f64,
    pub se: f64,
    pub xi: f64,
    pub pass: bool,
}

pub fn verify_lorden(
    model: &LifetimeModel,
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Result<LordenCheck> {
    let xi = crate::bounds::lorden_xi(model)?;
    let (mean, se) = crate::renewal::mean_overshoot_estimate(model, 0.0, t, n_paths, seed)?;
    Ok(LordenCheck {
        t,
        mean,
        se,
        xi,
        pass: mean <= xi + 3.0 * se,
    })
}
