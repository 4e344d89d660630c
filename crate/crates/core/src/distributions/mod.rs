//! Absolutely continuous lifetime distributions.
//!
//! [`LifetimeModel`] covers the built-in families; [`DerivedModel`] wraps a
//! base model as either the residual lifetime at a given age or the
//! stationary overshoot law with density `(1 - F(s)) / Eξ`. Both implement
//! [`Lifetime`], which is what the coupling and bound code consume.

mod derived;
mod lifetime;
mod spec;

pub use derived::{residual_model, stationary_overshoot, DerivedKind, DerivedModel};
pub use lifetime::LifetimeModel;
pub use spec::ModelSpec;

use std::cell::Cell;
use std::fmt;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with, Tolerance};
use crate::solve::invert_monotone;

/// Survival level below which the hazard and residual laws are undefined.
pub const SATURATION: f64 = 1e-12;

/// A distribution on `[0, ∞)` with a density.
pub trait Lifetime: Send + Sync + fmt::Debug {
    /// Density; zero outside the support.
    fn pdf(&self, s: f64) -> f64;

    fn cdf(&self, s: f64) -> f64;

    /// `1 - cdf(s)`, computed without cancellation where the family allows.
    fn sf(&self, s: f64) -> f64 {
        1.0 - self.cdf(s)
    }

    /// `[lo, hi]`, `hi` possibly `+∞`.
    fn support(&self) -> (f64, f64);

    /// Points where the density is not smooth, including finite support ends.
    fn breakpoints(&self) -> Vec<f64>;

    /// Whether `E ξ^k` is finite.
    fn moment_finite(&self, _k: u32) -> bool {
        true
    }

    /// `inf { x : F(x) >= p }` for `p ∈ [0, 1)`.
    fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        let (lo, hi) = self.support();
        if p == 0.0 {
            return Ok(lo);
        }
        if p > 0.5 {
            // Invert the survival function to keep precision in the upper tail.
            let q = 1.0 - p;
            return Ok(invert_monotone(
                |x| -self.sf(x),
                |x| self.pdf(x),
                -q,
                lo,
                hi,
            ));
        }
        Ok(invert_monotone(|x| self.cdf(x), |x| self.pdf(x), p, lo, hi))
    }

    /// Inverse-CDF sampling: a deterministic function of `u ∈ [0, 1)`.
    fn sample(&self, u: f64) -> f64 {
        let u = if u.is_nan() {
            0.0
        } else {
            u.clamp(0.0, 1.0 - f64::EPSILON)
        };
        self.quantile(u)
            .expect("clamped uniform is a valid probability")
    }

    /// `λ(s) = f(s) / (1 - F(s))`.
    fn hazard(&self, s: f64) -> Result<f64> {
        let survival = self.sf(s);
        if survival <= SATURATION {
            return Err(Error::Saturation { at: s, survival });
        }
        Ok(self.pdf(s) / survival)
    }

    /// `E ξ^k` by adaptive quadrature.
    fn moment(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        if !self.moment_finite(k) {
            return Err(Error::DivergentMoment(format!(
                "E ξ^{k} is infinite for {self:?}"
            )));
        }
        let (lo, hi) = self.support();
        let q = integrate_with(
            &|s: f64| {
                let d = self.pdf(s);
                if d == 0.0 {
                    0.0
                } else {
                    s.powi(k as i32) * d
                }
            },
            lo,
            hi,
            &self.breakpoints(),
            Tolerance::default(),
        );
        if !q.value.is_finite() {
            return Err(Error::DivergentMoment(format!(
                "E ξ^{k} did not converge for {self:?}"
            )));
        }
        Ok(q.value)
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability {p} outside [0, 1)")))
    }
}

/// `F(s) = 1 - exp(-∫_0^s λ(u) du)` from a hazard curve.
pub fn cdf_from_hazard<H: Fn(f64) -> f64>(hazard: H, s: f64) -> Result<f64> {
    cdf_from_hazard_with_breaks(hazard, s, &[])
}

/// As [`cdf_from_hazard`], splitting the integral at known discontinuities of `λ`.
pub fn cdf_from_hazard_with_breaks<H: Fn(f64) -> f64>(
    hazard: H,
    s: f64,
    breaks: &[f64],
) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::Domain(format!(
            "hazard integral needs s >= 0, got {s}"
        )));
    }
    let negative = Cell::new(None);
    let integrand = |u: f64| {
        let h = hazard(u);
        if h < 0.0 && negative.get().is_none() {
            negative.set(Some((u, h)));
        }
        h
    };
    let q = integrate_with(&integrand, 0.0, s, breaks, Tolerance::tight());
    if let Some((u, h)) = negative.get() {
        return Err(Error::Domain(format!("negative hazard {h} at u = {u}")));
    }
    if q.value.is_nan() {
        return Err(Error::Domain("hazard integral is NaN".into()));
    }
    Ok(-(-q.value).exp_m1())
}
