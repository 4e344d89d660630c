use super::{check_probability, Lifetime, LifetimeModel, SATURATION};
use crate::error::{Error, Result};
use crate::solve::invert_monotone;

/// Which law a [`DerivedModel`] represents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivedKind {
    /// Remaining lifetime given elapsed age `offset`: `F_b(s) = (F(s+b) - F(b)) / (1 - F(b))`.
    Residual { offset: f64, base_sf: f64 },
    /// Limit law of the overshoot: density `(1 - F(s)) / mean`.
    StationaryOvershoot { mean: f64 },
}

/// A law derived from a base [`LifetimeModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedModel {
    base: LifetimeModel,
    kind: DerivedKind,
}

/// Residual lifetime at age `b`. Fails with a saturation error when `F(b) >= 1 - 1e-12`.
pub fn residual_model(model: &LifetimeModel, b: f64) -> Result<DerivedModel> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::Domain(format!(
            "residual offset must be finite and >= 0, got {b}"
        )));
    }
    let base_sf = model.sf(b);
    if base_sf <= SATURATION {
        return Err(Error::Saturation {
            at: b,
            survival: base_sf,
        });
    }
    Ok(DerivedModel {
        base: model.clone(),
        kind: DerivedKind::Residual { offset: b, base_sf },
    })
}

/// Stationary overshoot law `F̃(s) = ∫_0^s (1 - F(u)) du / Eξ`.
pub fn stationary_overshoot(model: &LifetimeModel) -> Result<DerivedModel> {
    if !model.moment_finite(1) {
        return Err(Error::DivergentMoment(format!(
            "mean of {model:?} is infinite"
        )));
    }
    Ok(DerivedModel {
        base: model.clone(),
        kind: DerivedKind::StationaryOvershoot { mean: model.mean() },
    })
}

impl DerivedModel {
    pub fn base(&self) -> &LifetimeModel {
        &self.base
    }

    pub fn kind(&self) -> DerivedKind {
        self.kind
    }

    /// Residual of a residual law: ages add up.
    pub fn residual(&self, b: f64) -> Result<DerivedModel> {
        match self.kind {
            DerivedKind::Residual { offset, .. } => residual_model(&self.base, offset + b),
            DerivedKind::StationaryOvershoot { .. } => Err(Error::Domain(
                "residual of a stationary-overshoot law is not supported".into(),
            )),
        }
    }
}

impl Lifetime for DerivedModel {
    fn pdf(&self, s: f64) -> f64 {
        if s < 0.0 || s.is_nan() {
            return 0.0;
        }
        match self.kind {
            DerivedKind::Residual { offset, base_sf } => self.base.pdf(s + offset) / base_sf,
            DerivedKind::StationaryOvershoot { mean } => self.base.sf(s) / mean,
        }
    }

    fn cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self.kind {
            DerivedKind::Residual { .. } => 1.0 - self.sf(s),
            DerivedKind::StationaryOvershoot { mean } => {
                (self.base.integrated_sf(s) / mean).clamp(0.0, 1.0)
            }
        }
    }

    fn sf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        match self.kind {
            DerivedKind::Residual { offset, base_sf } => {
                (self.base.sf(s + offset) / base_sf).clamp(0.0, 1.0)
            }
            DerivedKind::StationaryOvershoot { .. } => 1.0 - self.cdf(s),
        }
    }

    fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.base.support();
        match self.kind {
            DerivedKind::Residual { offset, .. } => ((lo - offset).max(0.0), hi - offset),
            DerivedKind::StationaryOvershoot { .. } => (0.0, hi),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut points: Vec<f64> = match self.kind {
            DerivedKind::Residual { offset, .. } => self
                .base
                .breakpoints()
                .into_iter()
                .map(|x| x - offset)
                .filter(|&x| x > 0.0)
                .collect(),
            DerivedKind::StationaryOvershoot { .. } => self.base.breakpoints(),
        };
        points.push(0.0);
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }

    fn moment_finite(&self, k: u32) -> bool {
        match self.kind {
            DerivedKind::Residual { .. } => self.base.moment_finite(k),
            DerivedKind::StationaryOvershoot { .. } => self.base.moment_finite(k + 1),
        }
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        let (lo, hi) = self.support();
        match self.kind {
            DerivedKind::Residual { offset, base_sf } => {
                if p == 0.0 {
                    return Ok(lo);
                }
                let x = self.base.quantile_sf((1.0 - p) * base_sf) - offset;
                Ok(x.clamp(lo, hi))
            }
            DerivedKind::StationaryOvershoot { .. } => {
                if p == 0.0 {
                    return Ok(0.0);
                }
                Ok(invert_monotone(|x| self.cdf(x), |x| self.pdf(x), p, lo, hi))
            }
        }
    }
}
