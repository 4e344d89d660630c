//! Common-part coupling of densities and the parallel-coupling simulator.
//!
//! For densities `f₁, …, f_n` with common part `φ = min_i f_i` and mass
//! `κ = ∫ φ`, draw `U, U′, U″`:
//!
//! ```text
//! ξ_i = Φ⁻¹(κ U′)                 if U < κ      (shared value)
//! ξ_i = Ψ_i⁻¹((1 - κ) U″_i)       otherwise
//! ```
//!
//! where `Φ(s) = ∫_{-∞}^s φ` and `Ψ_i = F_i - Φ`. Every `ξ_i` has law `F_i`
//! and all coincide with probability exactly `κ`.

mod parallel;

pub use parallel::{
    coupling_time_samples, coupling_traces, simulate_parallel_coupling, AttemptRecord,
    CoupledPaths, CouplingFault, CouplingTrace, ParallelCoupling, TauSample, TraceSummary,
};

use crate::distributions::Lifetime;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_with, Tolerance};
use crate::solve::invert_monotone;

/// Common parts within this distance of one are treated as identical laws.
pub const DEGENERATE_GAP: f64 = 1e-9;

/// Equal-width cells laid over the overlap before cumulative tabulation.
const TABLE_CELLS: usize = 24;

/// Survival level that ends the finite part of the table on unbounded supports.
const TABLE_TAIL: f64 = 1e-13;

fn overlap_window(models: &[&dyn Lifetime]) -> (f64, f64, Vec<f64>) {
    let lo = models
        .iter()
        .map(|m| m.support().0)
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = models
        .iter()
        .map(|m| m.support().1)
        .fold(f64::INFINITY, f64::min);
    let mut breaks: Vec<f64> = models.iter().flat_map(|m| m.breakpoints()).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    (lo, hi, breaks)
}

fn min_density(models: &[&dyn Lifetime], s: f64) -> f64 {
    models
        .iter()
        .map(|m| m.pdf(s))
        .fold(f64::INFINITY, f64::min)
}

/// `κ = ∫ min(f₁, f₂)`, the mass two laws can share.
pub fn common_part(m1: &dyn Lifetime, m2: &dyn Lifetime) -> f64 {
    common_part_n(&[m1, m2])
}

/// `κ_n = ∫ min_i f_i`.
pub fn common_part_n(models: &[&dyn Lifetime]) -> f64 {
    let (lo, hi, breaks) = overlap_window(models);
    if !(hi > lo) {
        return 0.0;
    }
    let q = integrate_with(
        &|s| min_density(models, s),
        lo,
        hi,
        &breaks,
        Tolerance::default(),
    );
    q.value.clamp(0.0, 1.0)
}

/// Tabulated common part `Φ` of `n >= 2` laws with the residual CDFs `Ψ_i = F_i - Φ`.
#[derive(Debug)]
pub struct CommonPart<'a> {
    models: Vec<&'a dyn Lifetime>,
    kappa: f64,
    breaks: Vec<f64>,
    lo: f64,
    hi: f64,
    /// Finite knots; `Φ(knots[i]) = cum[i]`.
    knots: Vec<f64>,
    cum: Vec<f64>,
}

impl<'a> CommonPart<'a> {
    /// Build the table. Fails with [`Error::NoOverlap`] when `κ = 0` and with
    /// [`Error::DegenerateDecomposition`] when the laws coincide (`κ ≈ 1`).
    pub fn new(models: Vec<&'a dyn Lifetime>) -> Result<Self> {
        if models.len() < 2 {
            return Err(Error::Domain("common part needs at least two laws".into()));
        }
        let kappa = common_part_n(&models);
        if kappa <= 0.0 {
            return Err(Error::NoOverlap { kappa });
        }
        if kappa >= 1.0 - DEGENERATE_GAP {
            return Err(Error::DegenerateDecomposition { kappa });
        }
        let (lo, hi, breaks) = overlap_window(&models);
        let end = if hi.is_finite() {
            hi
        } else {
            models
                .iter()
                .filter(|m| m.support().1.is_infinite())
                .map(|m| m.quantile(1.0 - TABLE_TAIL).unwrap_or(f64::INFINITY))
                .fold(f64::INFINITY, f64::min)
                .max(lo + 1.0)
        };
        let mut knots: Vec<f64> = (0..=TABLE_CELLS)
            .map(|i| lo + (end - lo) * i as f64 / TABLE_CELLS as f64)
            .chain(breaks.iter().copied().filter(|&x| x > lo && x < end))
            .collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let mut cum = Vec::with_capacity(knots.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in knots.windows(2) {
            acc += integrate_with(
                &|s| min_density(&models, s),
                w[0],
                w[1],
                &breaks,
                Tolerance::tight(),
            )
            .value;
            cum.push(acc);
        }
        // Anchor the table total to κ: the unbounded tail carries the rest.
        let kappa = if hi.is_finite() { acc } else { kappa.max(acc) };
        Ok(CommonPart {
            models,
            kappa,
            breaks,
            lo,
            hi,
            knots,
            cum,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn common_density(&self, s: f64) -> f64 {
        min_density(&self.models, s)
    }

    fn partial(&self, cell: usize, s: f64) -> f64 {
        let from = self.knots[cell];
        self.cum[cell]
            + integrate_with(
                &|x| min_density(&self.models, x),
                from,
                s,
                &self.breaks,
                Tolerance::tight(),
            )
            .value
    }

    /// Unnormalized `Φ(s) = ∫_{-∞}^s min_i f_i`.
    pub fn phi(&self, s: f64) -> f64 {
        if s <= self.lo {
            return 0.0;
        }
        if s >= self.hi {
            return self.kappa;
        }
        let cell = self.knots.partition_point(|&k| k <= s).saturating_sub(1);
        self.partial(cell, s).min(self.kappa)
    }

    /// Unnormalized `Ψ_i(s) = F_i(s) - Φ(s)`.
    pub fn psi(&self, i: usize, s: f64) -> f64 {
        (self.models[i].cdf(s) - self.phi(s)).max(0.0)
    }

    /// CDF of the shared component, `Φ / κ`.
    pub fn common_cdf(&self, s: f64) -> f64 {
        self.phi(s) / self.kappa
    }

    /// CDF of the `i`-th residual component, `Ψ_i / (1 - κ)`.
    pub fn residual_cdf(&self, i: usize, s: f64) -> f64 {
        (self.psi(i, s) / (1.0 - self.kappa)).min(1.0)
    }

    /// `Φ⁻¹(target)` for `target ∈ [0, κ)`.
    pub fn phi_inverse(&self, target: f64) -> f64 {
        let n = self.knots.len();
        let cell = self.cum.partition_point(|&c| c < target).saturating_sub(1);
        if cell + 1 >= n {
            // beyond the tabulated part: unbounded tail
            let from = self.knots[n - 1];
            return invert_monotone(
                |x| self.partial(n - 1, x),
                |x| self.common_density(x),
                target,
                from,
                f64::INFINITY,
            );
        }
        invert_monotone(
            |x| self.partial(cell, x),
            |x| self.common_density(x),
            target,
            self.knots[cell],
            self.knots[cell + 1],
        )
    }

    /// `Ψ_i⁻¹(target)` for `target ∈ [0, 1 - κ)`.
    pub fn psi_inverse(&self, i: usize, target: f64) -> f64 {
        let m = self.models[i];
        let (lo, hi) = m.support();
        invert_monotone(
            |x| self.psi(i, x),
            |x| (m.pdf(x) - self.common_density(x)).max(0.0),
            target,
            lo,
            hi,
        )
    }

    /// One draw of the n-way coupling. `u_residual[i]` feeds the residual
    /// branch of law `i`. Returns the values and whether they are all equal
    /// by construction (exactly when `u < κ`).
    pub fn couple(&self, u: f64, u_common: f64, u_residual: &[f64]) -> (Vec<f64>, bool) {
        assert_eq!(
            u_residual.len(),
            self.models.len(),
            "one residual uniform per law"
        );
        if u < self.kappa {
            let x = self.phi_inverse(self.kappa * u_common);
            (vec![x; self.models.len()], true)
        } else {
            let xs = u_residual
                .iter()
                .enumerate()
                .map(|(i, &v)| self.psi_inverse(i, (1.0 - self.kappa) * v))
                .collect();
            (xs, false)
        }
    }
}

/// Pairwise decomposition `F_j = κ · (Φ/κ) + (1 - κ) · (Ψ_j/(1 - κ))`.
#[derive(Debug)]
pub struct CommonPartDecomposition<'a> {
    part: CommonPart<'a>,
}

/// Split two laws into their common part and the two residual components.
pub fn decompose<'a>(
    m1: &'a dyn Lifetime,
    m2: &'a dyn Lifetime,
) -> Result<CommonPartDecomposition<'a>> {
    Ok(CommonPartDecomposition {
        part: CommonPart::new(vec![m1, m2])?,
    })
}

impl<'a> CommonPartDecomposition<'a> {
    pub fn kappa(&self) -> f64 {
        self.part.kappa()
    }

    pub fn common_cdf(&self, s: f64) -> f64 {
        self.part.common_cdf(s)
    }

    pub fn residual_1_cdf(&self, s: f64) -> f64 {
        self.part.residual_cdf(0, s)
    }

    pub fn residual_2_cdf(&self, s: f64) -> f64 {
        self.part.residual_cdf(1, s)
    }

    pub fn common_part(&self) -> &CommonPart<'a> {
        &self.part
    }
}

/// `(ξ₁, ξ₂, coupled)`; both residual branches consume the same `u″`.
pub fn couple_pair(
    dec: &CommonPartDecomposition<'_>,
    u: f64,
    u_common: f64,
    u_residual: f64,
) -> (f64, f64, bool) {
    let (xs, coupled) = dec.part.couple(u, u_common, &[u_residual, u_residual]);
    (xs[0], xs[1], coupled)
}

/// n-way coupling of `models` in one call. Identical laws (`κ_n ≈ 1`) all
/// return the first law's quantile of `u_common`.
pub fn couple_n(
    models: &[&dyn Lifetime],
    u: f64,
    u_common: f64,
    u_residual: &[f64],
) -> Result<(Vec<f64>, bool)> {
    match CommonPart::new(models.to_vec()) {
        Ok(part) => Ok(part.couple(u, u_common, u_residual)),
        Err(Error::DegenerateDecomposition { .. }) => {
            let x = models[0].sample(u_common);
            Ok((vec![x; models.len()], true))
        }
        Err(e) => Err(e),
    }
}
