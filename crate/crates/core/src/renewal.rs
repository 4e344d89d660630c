//! Delayed renewal processes and their overshoot / undershoot.
//!
//! The initial overshoot `b` is the age of the lifetime in progress at time
//! zero, so the first epoch is drawn from the residual law `F_b` and the
//! remaining gaps from `F`. Paths are materialized up to the horizon plus one
//! overflow epoch, which keeps undershoot queries answerable at the horizon.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{residual_model, Lifetime, LifetimeModel};
use crate::error::{Error, Result};
use crate::stats::mean_and_se;
use crate::stream::{substream, UniformSource};

/// Realized renewal epochs of one path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenewalPath {
    initial_overshoot: f64,
    epochs: Vec<f64>,
    horizon: f64,
}

impl RenewalPath {
    pub fn initial_overshoot(&self) -> f64 {
        self.initial_overshoot
    }

    pub fn epochs(&self) -> &[f64] {
        &self.epochs
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::Range(format!(
                "time {t} outside simulated window [0, {}]",
                self.horizon
            )));
        }
        Ok(())
    }

    /// Number of renewals in `(0, t]`.
    pub fn count_until(&self, t: f64) -> usize {
        self.epochs.partition_point(|&e| e <= t)
    }

    /// `B_t`: time since the last renewal at or before `t`, or `b + t` before the first.
    pub fn overshoot_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(match self.count_until(t) {
            0 => self.initial_overshoot + t,
            k => t - self.epochs[k - 1],
        })
    }

    /// `W_t`: time until the first renewal strictly after `t`.
    pub fn undershoot_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let k = self.count_until(t);
        self.epochs
            .get(k)
            .map(|e| e - t)
            .ok_or_else(|| Error::Range(format!("no retained epoch after t = {t}")))
    }
}

/// Build a path from explicit epochs (strictly increasing, positive).
impl TryFrom<(f64, Vec<f64>, f64)> for RenewalPath {
    type Error = Error;

    fn try_from((b, epochs, horizon): (f64, Vec<f64>, f64)) -> Result<Self> {
        if epochs.first().is_some_and(|&e| e < 0.0) || epochs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(
                "epochs must be positive and strictly increasing".into(),
            ));
        }
        Ok(RenewalPath {
            initial_overshoot: b,
            epochs,
            horizon,
        })
    }
}

/// Simulate one path started at age `b`: `t₁ = F_b⁻¹(u₁)`, `t_k = t_{k-1} + F⁻¹(u_k)`.
pub fn simulate_renewal<S: UniformSource + ?Sized>(
    model: &LifetimeModel,
    b: f64,
    horizon: f64,
    stream: &mut S,
) -> Result<RenewalPath> {
    if !(horizon > 0.0) {
        return Err(Error::Domain(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let first = residual_model(model, b)?;
    let mut epochs = Vec::with_capacity((horizon / model.mean()).ceil() as usize + 4);
    let mut t = first.sample(stream.next_uniform());
    epochs.push(t);
    while t <= horizon {
        t += model.sample(stream.next_uniform());
        epochs.push(t);
    }
    Ok(RenewalPath {
        initial_overshoot: b,
        epochs,
        horizon,
    })
}

/// Overshoots at every time of `t_grid` for `n_paths` independent paths.
///
/// Path `i` uses substream `(seed, i)`; the result is indexed `[t][path]`.
pub fn overshoots_on_grid(
    model: &LifetimeModel,
    b: f64,
    t_grid: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    residual_model(model, b)?;
    let horizon = t_grid.iter().copied().fold(0.0, f64::max);
    let rows: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            if horizon == 0.0 {
                return Ok(vec![b; t_grid.len()]);
            }
            let mut rng = substream(seed, i as u64);
            let path = simulate_renewal(model, b, horizon, &mut rng)?;
            t_grid.iter().map(|&t| path.overshoot_at(t)).collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..t_grid.len())
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect())
}

/// Monte Carlo estimate of `E B_t` with its standard error.
pub fn mean_overshoot_estimate(
    model: &LifetimeModel,
    b: f64,
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_paths < 100 {
        return Err(Error::Domain(format!(
            "need at least 100 paths, got {n_paths}"
        )));
    }
    if t == 0.0 {
        residual_model(model, b)?;
        return Ok((b, 0.0));
    }
    let samples = overshoots_on_grid(model, b, &[t], n_paths, seed)?;
    Ok(mean_and_se(&samples[0]))
}

/// Write paths as CSV with columns `path_id,k,epoch`.
pub fn write_paths_csv<W: Write>(paths: &[RenewalPath], mut out: W) -> io::Result<()> {
    writeln!(out, "path_id,k,epoch")?;
    for (id, path) in paths.iter().enumerate() {
        for (k, e) in path.epochs.iter().enumerate() {
            writeln!(out, "{id},{},{e}", k + 1)?;
        }
    }
    Ok(())
}
