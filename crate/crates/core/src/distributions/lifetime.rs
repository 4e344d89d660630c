use statrs::function::gamma::{gamma, gamma_lr, gamma_ur, ln_gamma};

use super::{check_probability, Lifetime, ModelSpec};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_with, Tolerance};
use crate::solve::invert_monotone;

/// Raw mass deviation above which a tabulated density triggers a warning.
const TABULATED_MASS_WARN: f64 = 1e-6;

/// A built-in lifetime distribution with validated parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeModel {
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64, ln_norm: f64 },
    Weibull { shape: f64, scale: f64 },
    Uniform { lo: f64, hi: f64 },
    Hyperexp { weights: Vec<f64>, rates: Vec<f64> },
    Tabulated(Table),
    Lomax { shape: f64, scale: f64 },
}

/// Piecewise-linear density on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
struct Table {
    grid: Vec<f64>,
    density: Vec<f64>,
    /// `cum[i]` = mass on `[grid[0], grid[i]]`.
    cum: Vec<f64>,
}

impl Table {
    fn cell(&self, s: f64) -> usize {
        let i = self.grid.partition_point(|&x| x <= s);
        i.saturating_sub(1).min(self.grid.len() - 2)
    }

    fn pdf(&self, s: f64) -> f64 {
        let n = self.grid.len();
        if s < self.grid[0] || s > self.grid[n - 1] {
            return 0.0;
        }
        let i = self.cell(s);
        let h = self.grid[i + 1] - self.grid[i];
        let t = (s - self.grid[i]) / h;
        self.density[i] + t * (self.density[i + 1] - self.density[i])
    }

    fn cdf(&self, s: f64) -> f64 {
        let n = self.grid.len();
        if s <= self.grid[0] {
            return 0.0;
        }
        if s >= self.grid[n - 1] {
            return 1.0;
        }
        let i = self.cell(s);
        let h = self.grid[i + 1] - self.grid[i];
        let t = s - self.grid[i];
        let slope = (self.density[i + 1] - self.density[i]) / h;
        (self.cum[i] + self.density[i] * t + 0.5 * slope * t * t).min(1.0)
    }

    fn quantile(&self, p: f64) -> f64 {
        // first cell whose right cumulative mass reaches p and that carries mass
        let n = self.grid.len();
        let mut i = self.cum.partition_point(|&c| c < p).saturating_sub(1);
        while i + 1 < n - 1 && (self.cum[i + 1] < p || self.cum[i + 1] == self.cum[i]) {
            i += 1;
        }
        let h = self.grid[i + 1] - self.grid[i];
        let a = 0.5 * (self.density[i + 1] - self.density[i]) / h;
        let b = self.density[i];
        let r = (p - self.cum[i]).max(0.0);
        let disc = (b * b + 4.0 * a * r).max(0.0);
        let denom = b + disc.sqrt();
        let t = if denom > 0.0 { 2.0 * r / denom } else { 0.0 };
        (self.grid[i] + t).min(self.grid[i + 1])
    }
}

impl LifetimeModel {
    pub fn exponential(rate: f64) -> Result<Self> {
        positive("rate", rate)?;
        Ok(Self::from_kind(Kind::Exponential { rate }))
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        positive("shape", shape)?;
        positive("rate", rate)?;
        let ln_norm = shape * rate.ln() - ln_gamma(shape);
        Ok(Self::from_kind(Kind::Gamma {
            shape,
            rate,
            ln_norm,
        }))
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        positive("shape", shape)?;
        positive("scale", scale)?;
        Ok(Self::from_kind(Kind::Weibull { shape, scale }))
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return Err(Error::InvalidModel(format!(
                "uniform needs 0 <= lo < hi < ∞, got [{lo}, {hi}]"
            )));
        }
        Ok(Self::from_kind(Kind::Uniform { lo, hi }))
    }

    /// Mixture of exponentials; weights must sum to one.
    pub fn hyperexp(weights: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() != rates.len() {
            return Err(Error::InvalidModel(
                "hyperexp needs equally long, non-empty weights and rates".into(),
            ));
        }
        for &w in &weights {
            positive("weight", w)?;
        }
        for &r in &rates {
            positive("rate", r)?;
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidModel(format!(
                "hyperexp weights sum to {total}, expected 1"
            )));
        }
        Ok(Self::from_kind(Kind::Hyperexp { weights, rates }))
    }

    /// Piecewise-linear density through `(grid[i], density[i])`.
    ///
    /// The grid must be strictly increasing (a repeated node would encode a
    /// point mass). The density is renormalized to unit mass; a warning is
    /// logged when the raw mass is off by more than `1e-6`.
    pub fn tabulated(grid: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != density.len() {
            return Err(Error::InvalidModel(
                "tabulated needs at least two nodes and matching density values".into(),
            ));
        }
        if grid.iter().chain(&density).any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel(
                "tabulated values must be finite".into(),
            ));
        }
        if grid[0] < 0.0 {
            return Err(Error::InvalidModel(
                "tabulated grid must start at >= 0".into(),
            ));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidModel(
                "tabulated grid must be strictly increasing (point masses are not supported)"
                    .into(),
            ));
        }
        if density.iter().any(|&d| d < 0.0) {
            return Err(Error::InvalidModel(
                "tabulated density must be nonnegative".into(),
            ));
        }
        let mut cum = Vec::with_capacity(grid.len());
        cum.push(0.0);
        for i in 0..grid.len() - 1 {
            let m = 0.5 * (density[i] + density[i + 1]) * (grid[i + 1] - grid[i]);
            cum.push(cum[i] + m);
        }
        let mass = *cum.last().unwrap();
        if mass <= 0.0 {
            return Err(Error::InvalidModel(
                "tabulated density has zero mass".into(),
            ));
        }
        if (mass - 1.0).abs() > TABULATED_MASS_WARN {
            log::warn!("tabulated density has mass {mass}; renormalizing");
        }
        let density = density.into_iter().map(|d| d / mass).collect();
        let cum = cum.into_iter().map(|c| c / mass).collect();
        Ok(Self::from_kind(Kind::Tabulated(Table {
            grid,
            density,
            cum,
        })))
    }

    /// Pareto type II: survival `(1 + s/scale)^(-shape)`. Moments of order
    /// `k >= shape` diverge; `shape <= 1` (infinite mean) is rejected.
    pub fn lomax(shape: f64, scale: f64) -> Result<Self> {
        positive("scale", scale)?;
        if !(shape > 1.0 && shape.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "lomax shape must exceed 1 for a finite mean, got {shape}"
            )));
        }
        Ok(Self::from_kind(Kind::Lomax { shape, scale }))
    }

    fn from_kind(kind: Kind) -> Self {
        LifetimeModel { kind }
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        match spec.clone() {
            ModelSpec::Exponential { rate } => Self::exponential(rate),
            ModelSpec::Gamma { shape, rate } => Self::gamma(shape, rate),
            ModelSpec::Weibull { shape, scale } => Self::weibull(shape, scale),
            ModelSpec::Uniform { lo, hi } => Self::uniform(lo, hi),
            ModelSpec::Hyperexp { weights, rates } => Self::hyperexp(weights, rates),
            ModelSpec::Tabulated { grid, density } => Self::tabulated(grid, density),
            ModelSpec::Lomax { shape, scale } => Self::lomax(shape, scale),
        }
    }

    /// Parse a JSON distribution spec such as `{"family":"exponential","rate":1.0}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text)
            .map_err(|e| Error::InvalidModel(format!("distribution spec: {e}")))?;
        Self::from_spec(&spec)
    }

    pub fn spec(&self) -> ModelSpec {
        match &self.kind {
            Kind::Exponential { rate } => ModelSpec::Exponential { rate: *rate },
            Kind::Gamma { shape, rate, .. } => ModelSpec::Gamma {
                shape: *shape,
                rate: *rate,
            },
            Kind::Weibull { shape, scale } => ModelSpec::Weibull {
                shape: *shape,
                scale: *scale,
            },
            Kind::Uniform { lo, hi } => ModelSpec::Uniform { lo: *lo, hi: *hi },
            Kind::Hyperexp { weights, rates } => ModelSpec::Hyperexp {
                weights: weights.clone(),
                rates: rates.clone(),
            },
            Kind::Tabulated(t) => ModelSpec::Tabulated {
                grid: t.grid.clone(),
                density: t.density.clone(),
            },
            Kind::Lomax { shape, scale } => ModelSpec::Lomax {
                shape: *shape,
                scale: *scale,
            },
        }
    }

    pub fn family(&self) -> &'static str {
        match self.kind {
            Kind::Exponential { .. } => "exponential",
            Kind::Gamma { .. } => "gamma",
            Kind::Weibull { .. } => "weibull",
            Kind::Uniform { .. } => "uniform",
            Kind::Hyperexp { .. } => "hyperexp",
            Kind::Tabulated(_) => "tabulated",
            Kind::Lomax { .. } => "lomax",
        }
    }

    /// Closed-form mean (quadrature for tabulated densities).
    pub fn mean(&self) -> f64 {
        match &self.kind {
            Kind::Exponential { rate } => 1.0 / rate,
            Kind::Gamma { shape, rate, .. } => shape / rate,
            Kind::Weibull { shape, scale } => scale * gamma(1.0 + 1.0 / shape),
            Kind::Uniform { lo, hi } => 0.5 * (lo + hi),
            Kind::Hyperexp { weights, rates } => {
                weights.iter().zip(rates).map(|(w, r)| w / r).sum()
            }
            Kind::Tabulated(_) => self.moment(1).expect("bounded support"),
            Kind::Lomax { shape, scale } => scale / (shape - 1.0),
        }
    }

    /// `∫_0^s (1 - F(u)) du`.
    pub fn integrated_sf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            Kind::Exponential { rate } => -(-rate * s).exp_m1() / rate,
            Kind::Gamma { shape, rate, .. } => {
                if s.is_infinite() {
                    return shape / rate;
                }
                s * self.sf(s) + shape / rate * gamma_lr(shape + 1.0, rate * s)
            }
            Kind::Weibull { shape, scale } => {
                let m = scale * gamma(1.0 + 1.0 / shape);
                if s.is_infinite() {
                    return m;
                }
                s * self.sf(s) + m * gamma_lr(1.0 + 1.0 / shape, (s / scale).powf(*shape))
            }
            Kind::Uniform { lo, hi } => {
                if s <= *lo {
                    s
                } else if s >= *hi {
                    0.5 * (lo + hi)
                } else {
                    let w = hi - lo;
                    lo + (w * w - (hi - s) * (hi - s)) / (2.0 * w)
                }
            }
            Kind::Hyperexp { weights, rates } => weights
                .iter()
                .zip(rates)
                .map(|(w, r)| w * -(-r * s).exp_m1() / r)
                .sum(),
            Kind::Tabulated(t) => {
                let end = s.min(*t.grid.last().unwrap());
                integrate_with(&|u| self.sf(u), 0.0, end, &t.grid, Tolerance::tight()).value
            }
            Kind::Lomax { shape, scale } => {
                let tail = if s.is_infinite() {
                    0.0
                } else {
                    (1.0 + s / scale).powf(1.0 - shape)
                };
                scale / (shape - 1.0) * (1.0 - tail)
            }
        }
    }

    /// `inf { x : 1 - F(x) <= q }` for `q ∈ (0, 1]`; the upper-tail quantile.
    pub fn quantile_sf(&self, q: f64) -> f64 {
        let (lo, hi) = self.support();
        if q >= 1.0 {
            return lo;
        }
        if q <= 0.0 {
            return hi;
        }
        match &self.kind {
            Kind::Exponential { rate } => -q.ln() / rate,
            Kind::Weibull { shape, scale } => scale * (-q.ln()).powf(1.0 / shape),
            Kind::Uniform { lo, hi } => hi - q * (hi - lo),
            Kind::Lomax { shape, scale } => scale * (q.powf(-1.0 / shape) - 1.0),
            Kind::Tabulated(t) => t.quantile(1.0 - q),
            Kind::Gamma { .. } | Kind::Hyperexp { .. } => {
                if q < 0.5 {
                    invert_monotone(|x| -self.sf(x), |x| self.pdf(x), -q, lo, hi)
                } else {
                    invert_monotone(|x| self.cdf(x), |x| self.pdf(x), 1.0 - q, lo, hi)
                }
            }
        }
    }

    /// Whether `E exp(α ξ)` is finite.
    pub fn mgf_finite(&self, alpha: f64) -> bool {
        if alpha <= 0.0 {
            return true;
        }
        match &self.kind {
            Kind::Exponential { rate } | Kind::Gamma { rate, .. } => alpha < *rate,
            Kind::Weibull { shape, scale } => {
                *shape > 1.0 || (*shape == 1.0 && alpha < 1.0 / scale)
            }
            Kind::Uniform { .. } | Kind::Tabulated(_) => true,
            Kind::Hyperexp { rates, .. } => rates.iter().all(|r| alpha < *r),
            Kind::Lomax { .. } => false,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl Lifetime for LifetimeModel {
    fn pdf(&self, s: f64) -> f64 {
        if s.is_nan() {
            return 0.0;
        }
        match &self.kind {
            Kind::Exponential { rate } => {
                if s < 0.0 {
                    0.0
                } else {
                    rate * (-rate * s).exp()
                }
            }
            Kind::Gamma {
                shape,
                rate,
                ln_norm,
            } => {
                if s < 0.0 || s.is_infinite() {
                    0.0
                } else if s == 0.0 {
                    if *shape < 1.0 {
                        f64::INFINITY
                    } else if *shape == 1.0 {
                        *rate
                    } else {
                        0.0
                    }
                } else {
                    (ln_norm + (shape - 1.0) * s.ln() - rate * s).exp()
                }
            }
            Kind::Weibull { shape, scale } => {
                if s < 0.0 || s.is_infinite() {
                    return 0.0;
                }
                let z = s / scale;
                if z == 0.0 {
                    return if *shape < 1.0 {
                        f64::INFINITY
                    } else if *shape == 1.0 {
                        1.0 / scale
                    } else {
                        0.0
                    };
                }
                shape / scale * z.powf(shape - 1.0) * (-z.powf(*shape)).exp()
            }
            Kind::Uniform { lo, hi } => {
                if s < *lo || s > *hi {
                    0.0
                } else {
                    1.0 / (hi - lo)
                }
            }
            Kind::Hyperexp { weights, rates } => {
                if s < 0.0 {
                    0.0
                } else {
                    weights
                        .iter()
                        .zip(rates)
                        .map(|(w, r)| w * r * (-r * s).exp())
                        .sum()
                }
            }
            Kind::Tabulated(t) => t.pdf(s),
            Kind::Lomax { shape, scale } => {
                if s < 0.0 {
                    0.0
                } else {
                    shape / scale * (1.0 + s / scale).powf(-shape - 1.0)
                }
            }
        }
    }

    fn cdf(&self, s: f64) -> f64 {
        if s.is_nan() {
            return f64::NAN;
        }
        if s == f64::INFINITY {
            return 1.0;
        }
        match &self.kind {
            Kind::Exponential { rate } => {
                if s <= 0.0 {
                    0.0
                } else {
                    -(-rate * s).exp_m1()
                }
            }
            Kind::Gamma { shape, rate, .. } => {
                if s <= 0.0 {
                    0.0
                } else {
                    gamma_lr(*shape, rate * s)
                }
            }
            Kind::Weibull { shape, scale } => {
                if s <= 0.0 {
                    0.0
                } else {
                    -(-(s / scale).powf(*shape)).exp_m1()
                }
            }
            Kind::Uniform { lo, hi } => ((s - lo) / (hi - lo)).clamp(0.0, 1.0),
            Kind::Hyperexp { .. } => {
                if s <= 0.0 {
                    0.0
                } else {
                    1.0 - self.sf(s)
                }
            }
            Kind::Tabulated(t) => t.cdf(s),
            Kind::Lomax { shape, scale } => {
                if s <= 0.0 {
                    0.0
                } else {
                    -(-shape * (s / scale).ln_1p()).exp_m1()
                }
            }
        }
    }

    fn sf(&self, s: f64) -> f64 {
        if s == f64::INFINITY {
            return 0.0;
        }
        match &self.kind {
            Kind::Exponential { rate } => {
                if s <= 0.0 {
                    1.0
                } else {
                    (-rate * s).exp()
                }
            }
            Kind::Gamma { shape, rate, .. } => {
                if s <= 0.0 {
                    1.0
                } else {
                    gamma_ur(*shape, rate * s)
                }
            }
            Kind::Weibull { shape, scale } => {
                if s <= 0.0 {
                    1.0
                } else {
                    (-(s / scale).powf(*shape)).exp()
                }
            }
            Kind::Uniform { lo, hi } => ((hi - s) / (hi - lo)).clamp(0.0, 1.0),
            Kind::Hyperexp { weights, rates } => {
                if s <= 0.0 {
                    1.0
                } else {
                    weights
                        .iter()
                        .zip(rates)
                        .map(|(w, r)| w * (-r * s).exp())
                        .sum::<f64>()
                        .min(1.0)
                }
            }
            Kind::Tabulated(t) => 1.0 - t.cdf(s),
            Kind::Lomax { shape, scale } => {
                if s <= 0.0 {
                    1.0
                } else {
                    (1.0 + s / scale).powf(-shape)
                }
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Uniform { lo, hi } => (*lo, *hi),
            Kind::Tabulated(t) => (t.grid[0], *t.grid.last().unwrap()),
            _ => (0.0, f64::INFINITY),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Uniform { lo, hi } => vec![*lo, *hi],
            Kind::Tabulated(t) => t.grid.clone(),
            _ => vec![0.0],
        }
    }

    fn moment_finite(&self, k: u32) -> bool {
        match &self.kind {
            Kind::Lomax { shape, .. } => (k as f64) < *shape,
            _ => true,
        }
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        Ok(match &self.kind {
            Kind::Exponential { rate } => -(-p).ln_1p() / rate,
            Kind::Weibull { shape, scale } => scale * (-(-p).ln_1p()).powf(1.0 / shape),
            Kind::Uniform { lo, hi } => lo + p * (hi - lo),
            Kind::Lomax { shape, scale } => scale * ((-(-p).ln_1p() / shape).exp_m1()),
            Kind::Tabulated(t) => t.quantile(p),
            Kind::Gamma { .. } | Kind::Hyperexp { .. } => {
                if p == 0.0 {
                    0.0
                } else {
                    self.quantile_sf(1.0 - p)
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn families() -> Vec<LifetimeModel> {
        vec![
            LifetimeModel::exponential(1.0).unwrap(),
            LifetimeModel::exponential(3.5).unwrap(),
            LifetimeModel::gamma(2.0, 1.0).unwrap(),
            LifetimeModel::gamma(0.7, 2.0).unwrap(),
            LifetimeModel::weibull(2.0, 1.0).unwrap(),
            LifetimeModel::weibull(1.5, 0.4).unwrap(),
            LifetimeModel::uniform(0.0, 1.0).unwrap(),
            LifetimeModel::uniform(2.0, 4.0).unwrap(),
            LifetimeModel::hyperexp(vec![0.5, 0.5], vec![1.0, 2.0]).unwrap(),
            LifetimeModel::hyperexp(vec![0.2, 0.3, 0.5], vec![0.5, 4.0, 9.0]).unwrap(),
            LifetimeModel::tabulated(vec![0.0, 0.5, 1.0, 2.0], vec![0.0, 1.0, 0.5, 0.0]).unwrap(),
            LifetimeModel::lomax(3.5, 2.0).unwrap(),
        ]
    }

    #[test]
    fn pdf_examples() {
        let e = LifetimeModel::exponential(1.0).unwrap();
        assert_eq!(e.pdf(0.0), 1.0);
        assert_eq!(e.pdf(-1.0), 0.0);
        assert_eq!(LifetimeModel::uniform(0.0, 2.0).unwrap().pdf(1.0), 0.5);
    }

    #[test]
    fn cdf_examples() {
        let e = LifetimeModel::exponential(1.0).unwrap();
        assert!((e.cdf(2f64.ln()) - 0.5).abs() < 1e-15);
        for m in families() {
            assert_eq!(m.cdf(f64::INFINITY), 1.0);
        }
        assert!((LifetimeModel::uniform(0.0, 1.0).unwrap().cdf(0.25) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn normalization_by_quadrature() {
        for m in families() {
            let (lo, hi) = m.support();
            let q = integrate_with(&|s| m.pdf(s), lo, hi, &m.breakpoints(), Tolerance::tight());
            assert!((q.value - 1.0).abs() < 1e-9, "{m:?}: {}", q.value);
        }
    }

    #[test]
    fn quantile_round_trip() {
        for m in families() {
            for i in 1..50 {
                let p = i as f64 / 50.0;
                let x = m.quantile(p).unwrap();
                assert!((m.cdf(x) - p).abs() < 1e-9, "{m:?} p={p}");
                // interior s round trip
                let s = x;
                if m.pdf(s) > 1e-6 {
                    let back = m.quantile(m.cdf(s)).unwrap();
                    assert!((back - s).abs() < 1e-8, "{m:?} s={s} back={back}");
                }
            }
        }
    }

    #[test]
    fn quantile_domain() {
        let e = LifetimeModel::exponential(1.0).unwrap();
        assert!(matches!(e.quantile(1.0), Err(Error::Domain(_))));
        assert!(matches!(e.quantile(-0.1), Err(Error::Domain(_))));
        let x = e.quantile(1.0 - (-1.0f64).exp()).unwrap();
        assert!((x - 1.0).abs() < 1e-12);
        assert_eq!(
            LifetimeModel::uniform(0.0, 2.0)
                .unwrap()
                .quantile(0.5)
                .unwrap(),
            1.0
        );
    }

    #[test]
    fn sample_examples() {
        assert_eq!(LifetimeModel::exponential(1.0).unwrap().sample(0.0), 0.0);
        assert_eq!(LifetimeModel::uniform(2.0, 4.0).unwrap().sample(0.5), 3.0);
    }

    #[test]
    fn hazard_examples() {
        let e = LifetimeModel::exponential(2.0).unwrap();
        assert!((e.hazard(5.0).unwrap() - 2.0).abs() < 1e-12);
        let u = LifetimeModel::uniform(0.0, 1.0).unwrap();
        assert!((u.hazard(0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(u.hazard(1.0), Err(Error::Saturation { .. })));
    }

    #[test]
    fn weibull_hazard_matches_quadrature_ratio() {
        // oracle: f / (1 - ∫_0^s f)
        let w = LifetimeModel::weibull(2.0, 1.0).unwrap();
        let f = |s: f64| 2.0 * s * (-s * s).exp();
        let cdf = integrate(f, 0.0, 1.0);
        let oracle = f(1.0) / (1.0 - cdf);
        assert!((oracle - 2.0).abs() < 1e-9);
        assert!((w.hazard(1.0).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn moments() {
        let e = LifetimeModel::exponential(1.0).unwrap();
        assert!((e.moment(2).unwrap() - 2.0).abs() < 1e-9);
        let u = LifetimeModel::uniform(0.0, 1.0).unwrap();
        assert!((u.moment(2).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let h = LifetimeModel::hyperexp(vec![0.5, 0.5], vec![1.0, 2.0]).unwrap();
        assert!((h.moment(1).unwrap() - 0.75).abs() < 1e-9);
        for m in families() {
            assert!(
                (m.moment(1).unwrap() - m.mean()).abs() < 1e-9 * m.mean(),
                "{m:?}"
            );
        }
        let l = LifetimeModel::lomax(2.5, 1.0).unwrap();
        assert!(l.moment(2).is_ok());
        assert!(matches!(l.moment(3), Err(Error::DivergentMoment(_))));
    }

    #[test]
    fn integrated_survival_matches_quadrature() {
        for m in families() {
            for &s in &[0.1, 0.7, 1.3, 4.0] {
                let oracle =
                    integrate_with(&|u| m.sf(u), 0.0, s, &m.breakpoints(), Tolerance::tight())
                        .value;
                assert!((m.integrated_sf(s) - oracle).abs() < 1e-10, "{m:?} s={s}");
            }
            assert!((m.integrated_sf(f64::INFINITY) - m.mean()).abs() < 1e-9);
        }
    }

    #[test]
    fn upper_quantile_consistent() {
        for m in families() {
            for &q in &[0.9, 0.3, 1e-3, 1e-9] {
                let x = m.quantile_sf(q);
                assert!(
                    (m.sf(x) - q).abs() < 1e-9 * q.max(1e-3),
                    "{m:?} q={q} sf={}",
                    m.sf(x)
                );
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LifetimeModel::exponential(0.0).is_err());
        assert!(LifetimeModel::uniform(1.0, 1.0).is_err());
        assert!(LifetimeModel::hyperexp(vec![0.4, 0.4], vec![1.0, 2.0]).is_err());
        assert!(LifetimeModel::tabulated(vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(LifetimeModel::tabulated(vec![0.0, 1.0], vec![-1.0, 1.0]).is_err());
        assert!(LifetimeModel::lomax(1.0, 1.0).is_err());
    }

    #[test]
    fn tabulated_renormalizes() {
        let t = LifetimeModel::tabulated(vec![0.0, 1.0], vec![2.0, 2.0]).unwrap();
        assert!((t.pdf(0.5) - 1.0).abs() < 1e-15);
        assert!((t.cdf(0.25) - 0.25).abs() < 1e-15);
    }
}
