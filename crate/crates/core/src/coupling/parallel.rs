//! Parallel coupling of two overshoot processes `B` (age `b`) and `B′` (age `b′`).
//!
//! Phase one draws the first residual lifetimes `t₁ ~ F_b`, `t₁′ ~ F_{b′}`
//! independently. From `T₁ = max(t₁, t₁′)` on, every renewal epoch `θ` of `B′`
//! is a coupling attempt: with `u` the age of `B` at `θ`,
//!
//! * `u < Θ`: the remaining life of `B` (law `F_u`) and the next gap of `B′`
//!   (law `F`) are drawn jointly from their common-part decomposition; on
//!   success both renew at the same instant and the processes merge;
//! * `u >= Θ`: both are drawn independently.
//!
//! An attempt needs the current lifetime of `B` to be undetermined. Once a
//! joint draw has fixed it, later `B′` epochs before `B` renews are skipped.
//! Fresh gaps of `B` are resolved lazily: a gap that would carry `B` past the
//! next `B′` epoch is discarded and redrawn as a residual at that epoch, which
//! leaves the law of `B` unchanged because the gap is independent of `B′`.
//!
//! Uniforms are consumed in a fixed order: `t₁`, `t₁′`, then per event
//! (fresh gap, or an attempt triple `U, U′, U″`).

use rayon::prelude::*;
use serde::Serialize;

use super::{couple_pair, decompose};
use crate::distributions::{residual_model, DerivedModel, Lifetime, LifetimeModel};
use crate::error::{Error, Result};
use crate::stream::{substream, UniformSource};

/// Deliberate defects for harness self-tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingFault {
    /// Drop every residual-branch draw of `B` (the independent draw at
    /// `u >= Θ` and the `Ψ` branch of a failed joint draw), leaving its
    /// lifetime unrealized. Breaks the marginal law of `B`.
    SkipResidualBranch,
}

/// One coupling attempt at a renewal epoch of `B′`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttemptRecord {
    pub epoch: f64,
    /// Age of `B` at the epoch.
    pub overshoot_u: f64,
    /// `u < Θ`.
    pub theta_ok: bool,
    /// Common part of `F_u` and `F` (absent when `u >= Θ`).
    pub gamma_u: Option<f64>,
    pub success: bool,
    /// Common renewal epoch produced by a successful attempt.
    pub merge_epoch: Option<f64>,
}

/// Renewal epochs of both coordinates, extended past `τ` as a common path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledPaths {
    pub epochs: Vec<f64>,
    pub epochs_prime: Vec<f64>,
}

/// Outcome of one parallel-coupling run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingTrace {
    /// Coupling time; `None` when the horizon was reached first.
    pub tau: Option<f64>,
    /// `max(t₁, t₁′)`.
    #[serde(rename = "T1")]
    pub t1: f64,
    pub first_epochs: (f64, f64),
    pub attempts: Vec<AttemptRecord>,
    /// `(master seed, substream index)` when run from a seeded batch.
    pub seed: Option<(u64, u64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<CoupledPaths>,
}

impl CouplingTrace {
    pub fn censored(&self) -> bool {
        self.tau.is_none()
    }

    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            tau: self.tau,
            censored: self.censored(),
            t1: self.t1,
            n_attempts: self.attempts.len(),
        }
    }
}

/// One JSON-lines row of a trace dump: `{tau, censored, T1, n_attempts}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSummary {
    pub tau: Option<f64>,
    pub censored: bool,
    #[serde(rename = "T1")]
    pub t1: f64,
    pub n_attempts: usize,
}

/// A coupling time, `+∞` when censored at the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauSample {
    pub tau: f64,
    pub censored: bool,
}

/// Validated configuration of the parallel-coupling construction.
#[derive(Debug, Clone)]
pub struct ParallelCoupling {
    model: LifetimeModel,
    theta: f64,
    horizon: f64,
    first: DerivedModel,
    first_prime: DerivedModel,
    shared_first_gap: bool,
    record_until: Option<f64>,
    fault: Option<CouplingFault>,
}

impl ParallelCoupling {
    /// Requires `Θ > Ξ = Eξ²/Eξ`, `F(b) < 1`, `F(b′) < 1`.
    pub fn new(
        model: &LifetimeModel,
        b: f64,
        b_prime: f64,
        theta: f64,
        horizon: f64,
    ) -> Result<Self> {
        let xi = model.moment(2)? / model.moment(1)?;
        if !(theta > xi) {
            return Err(Error::Domain(format!(
                "threshold Θ = {theta} must exceed Ξ = {xi}"
            )));
        }
        if !(horizon > 0.0) {
            return Err(Error::Domain(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        Ok(ParallelCoupling {
            model: model.clone(),
            theta,
            horizon,
            first: residual_model(model, b)?,
            first_prime: residual_model(model, b_prime)?,
            shared_first_gap: false,
            record_until: None,
            fault: None,
        })
    }

    /// Draw `t₁` and `t₁′` from the same uniform (diagnostic).
    pub fn shared_first_gap(mut self, on: bool) -> Self {
        self.shared_first_gap = on;
        self
    }

    /// Keep both epoch sequences up to time `t`, continuing past `τ`.
    pub fn record_paths_until(mut self, t: f64) -> Self {
        self.record_until = Some(t);
        self
    }

    pub fn with_fault(mut self, fault: Option<CouplingFault>) -> Self {
        self.fault = fault;
        self
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Run one trace.
    pub fn run<S: UniformSource + ?Sized>(&self, stream: &mut S) -> Result<CouplingTrace> {
        let model = &self.model;
        let faulty = self.fault == Some(CouplingFault::SkipResidualBranch);
        let recording = self.record_until.is_some();
        let mut epochs = Vec::new();
        let mut epochs_prime = Vec::new();

        let u1 = stream.next_uniform();
        let u2 = if self.shared_first_gap {
            u1
        } else {
            stream.next_uniform()
        };
        let t1 = self.first.sample(u1);
        let t1_prime = self.first_prime.sample(u2);
        let big_t1 = t1.max(t1_prime);

        let mut attempts = Vec::new();
        let mut theta_ep = t1_prime;
        if recording {
            epochs_prime.push(theta_ep);
        }
        // Last renewal of B (None before t₁) and its next renewal (None while open).
        let mut b_last: Option<f64> = None;
        let mut b_next: Option<f64> = Some(t1);
        let mut tau = None;

        'outer: loop {
            // Bring B up to the current B′ epoch.
            while let Some(n) = b_next {
                if n > theta_ep {
                    break;
                }
                if recording {
                    epochs.push(n);
                }
                if n == theta_ep {
                    attempts.push(AttemptRecord {
                        epoch: n,
                        overshoot_u: 0.0,
                        theta_ok: true,
                        gamma_u: Some(1.0),
                        success: true,
                        merge_epoch: Some(n),
                    });
                    tau = Some(n);
                    break 'outer;
                }
                b_last = Some(n);
                let gap = model.sample(stream.next_uniform());
                b_next = if n + gap <= theta_ep {
                    Some(n + gap)
                } else {
                    None
                };
            }

            if theta_ep > self.horizon {
                break;
            }

            let next_prime = match (b_next, b_last) {
                (None, Some(last)) if theta_ep >= big_t1 => {
                    let u = theta_ep - last;
                    let (uc, ucommon, ures) = (
                        stream.next_uniform(),
                        stream.next_uniform(),
                        stream.next_uniform(),
                    );
                    if u < self.theta {
                        let residual = residual_model(model, u)?;
                        let (r, x, coupled, gamma) = match decompose(&residual, model) {
                            Ok(dec) => {
                                let (r, x, coupled) = couple_pair(&dec, uc, ucommon, ures);
                                (r, x, coupled, dec.kappa())
                            }
                            Err(Error::DegenerateDecomposition { kappa }) => {
                                let x = residual.sample(ucommon);
                                (x, x, true, kappa)
                            }
                            Err(e) => return Err(e),
                        };
                        attempts.push(AttemptRecord {
                            epoch: theta_ep,
                            overshoot_u: u,
                            theta_ok: true,
                            gamma_u: Some(gamma),
                            success: coupled,
                            merge_epoch: coupled.then_some(theta_ep + r),
                        });
                        if coupled {
                            let merged = theta_ep + r;
                            if recording {
                                epochs.push(merged);
                                epochs_prime.push(merged);
                            }
                            tau = Some(merged);
                            break 'outer;
                        }
                        if !faulty {
                            b_next = Some(theta_ep + r);
                        }
                        theta_ep + x
                    } else {
                        attempts.push(AttemptRecord {
                            epoch: theta_ep,
                            overshoot_u: u,
                            theta_ok: false,
                            gamma_u: None,
                            success: false,
                            merge_epoch: None,
                        });
                        let x = model.sample(ucommon);
                        if !faulty {
                            let r = residual_model(model, u)?.sample(ures);
                            // Independent draws: an unrealized residual can be discarded.
                            if r <= x {
                                b_next = Some(theta_ep + r);
                            }
                        }
                        theta_ep + x
                    }
                }
                _ => theta_ep + model.sample(stream.next_uniform()),
            };
            theta_ep = next_prime;
            if recording {
                epochs_prime.push(theta_ep);
            }
        }

        let paths = self.record_until.map(|until| {
            if let Some(t) = tau {
                let mut e = t;
                while e <= until {
                    e += model.sample(stream.next_uniform());
                    epochs.push(e);
                    epochs_prime.push(e);
                }
            }
            CoupledPaths {
                epochs,
                epochs_prime,
            }
        });

        Ok(CouplingTrace {
            tau,
            t1: big_t1,
            first_epochs: (t1, t1_prime),
            attempts,
            seed: None,
            paths,
        })
    }

    /// Run trace `index` of a batch seeded with `seed`.
    pub fn run_seeded(&self, seed: u64, index: u64) -> Result<CouplingTrace> {
        let mut rng = substream(seed, index);
        let mut trace = self.run(&mut rng)?;
        trace.seed = Some((seed, index));
        Ok(trace)
    }

    /// `n` independent traces, trace `i` on substream `(seed, i)`.
    pub fn batch(&self, n: usize, seed: u64) -> Result<Vec<CouplingTrace>> {
        (0..n)
            .into_par_iter()
            .map(|i| self.run_seeded(seed, i as u64))
            .collect()
    }
}

/// One parallel-coupling trace.
pub fn simulate_parallel_coupling<S: UniformSource + ?Sized>(
    model: &LifetimeModel,
    b: f64,
    b_prime: f64,
    theta: f64,
    horizon: f64,
    stream: &mut S,
) -> Result<CouplingTrace> {
    ParallelCoupling::new(model, b, b_prime, theta, horizon)?.run(stream)
}

/// Summaries of `n` seeded traces.
pub fn coupling_traces(
    model: &LifetimeModel,
    b: f64,
    b_prime: f64,
    theta: f64,
    n: usize,
    horizon: f64,
    seed: u64,
) -> Result<Vec<TraceSummary>> {
    let sim = ParallelCoupling::new(model, b, b_prime, theta, horizon)?;
    (0..n)
        .into_par_iter()
        .map(|i| sim.run_seeded(seed, i as u64).map(|t| t.summary()))
        .collect()
}

/// Coupling times of `n` seeded traces; censored entries carry `+∞`.
pub fn coupling_time_samples(
    model: &LifetimeModel,
    b: f64,
    b_prime: f64,
    theta: f64,
    n: usize,
    horizon: f64,
    seed: u64,
) -> Result<Vec<TauSample>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    Ok(coupling_traces(model, b, b_prime, theta, n, horizon, seed)?
        .into_iter()
        .map(|s| TauSample {
            tau: s.tau.unwrap_or(f64::INFINITY),
            censored: s.censored,
        })
        .collect())
}
