//! Analytic ingredients of the coupling bounds.
//!
//! * `Ξ = Eξ²/Eξ` bounds the mean overshoot uniformly in time, so an attempt
//!   at a threshold `Θ > Ξ` finds the overshoot below `Θ` with probability at
//!   least `p₀ = 1 − Ξ/Θ`.
//! * `κ(Θ) = inf_{0<u≤Θ} ∫ min(f(s+u), f(s)) ds` is a uniform lower bound on
//!   the common part of `F_u` and `F`, so each attempt succeeds with
//!   probability at least `ϰ = p₀κ`.
//! * `Υ` majorizes `E τˡ` through the geometric number of attempts; `Υ̃`
//!   averages it over a stationary start `b′ ~ F̃` and gives the rate
//!   `‖P_t^b − F̃‖_TV ≤ Υ̃/tˡ`.
//! * With a finite moment generating function the geometric-sum majorant
//!   `K_β` of `E e^{βτ}` gives the exponential rate `K̃_β e^{−βt}`.

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{residual_model, Lifetime, LifetimeModel};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_with, Tolerance};
use crate::solve::golden_section_max;

/// Overlaps at or below this make `κ` unusable.
pub const VANISHING_OVERLAP: f64 = 1e-12;
/// Default number of shifts `u` scanned by [`kappa_of_theta`].
pub const DEFAULT_U_GRID: usize = 200;
/// Series stop once a term drops below this fraction of the partial sum.
pub const SERIES_REL_TOL: f64 = 1e-14;
/// Hard cap on series length.
pub const SERIES_CAP: usize = 10_000_000;
/// Coarse grid size of [`optimize_theta`].
pub const THETA_GRID: usize = 64;
/// Required slack in `(1 − ϰ) m(β) ≤ 1 − MGF_SLACK`.
pub const MGF_SLACK: f64 = 1e-3;
/// Bisection resolution for `β`.
pub const BETA_WIDTH: f64 = 1e-6;

/// `Θ`, `Ξ`, `κ(Θ)`, `p₀ = 1 − Ξ/Θ` and `ϰ = p₀κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParameters {
    pub theta: f64,
    pub xi: f64,
    pub kappa: f64,
    pub p0: f64,
    pub varkappa: f64,
}

/// Which series multiplies `Eξˡ` in `Υ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesForm {
    /// `Σ (i+1)² (1−ϰ)^{i−1}`.
    #[default]
    Printed,
    /// `Σ (i+1)^{max(2,ℓ)} (1−ϰ)^{i−1}`.
    Strict,
}

/// Value of a summed series and whether the term cap cut it short.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSum {
    pub value: f64,
    pub terms: usize,
    pub capped: bool,
}

/// `Ξ = Eξ² / Eξ`.
pub fn lorden_xi(model: &LifetimeModel) -> Result<f64> {
    Ok(model.moment(2)? / model.moment(1)?)
}

/// `∫₀^∞ min(f(s+u), f(s)) ds`.
pub fn shifted_overlap(model: &LifetimeModel, u: f64) -> f64 {
    let (lo, hi) = model.support();
    let mut breaks = model.breakpoints();
    breaks.extend(model.breakpoints().iter().map(|x| x - u));
    integrate_with(
        &|s: f64| model.pdf(s + u).min(model.pdf(s)),
        lo.max(0.0),
        hi,
        &breaks,
        Tolerance::default(),
    )
    .value
}

/// `κ(Θ)`: minimum of [`shifted_overlap`] over `u = Θk/n`, `k = 1..n`, refined
/// by golden-section search around the grid minimizer.
pub fn kappa_of_theta(model: &LifetimeModel, theta: f64, u_grid_size: usize) -> Result<f64> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::Domain(format!(
            "threshold must be positive, got {theta}"
        )));
    }
    let n = u_grid_size.max(2);
    let values: Vec<f64> = (1..=n)
        .into_par_iter()
        .map(|k| shifted_overlap(model, theta * k as f64 / n as f64))
        .collect();
    let (k_min, &v_min) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is nonempty");
    let h = theta / n as f64;
    let centre = h * (k_min + 1) as f64;
    let (lo, hi) = ((centre - h).max(0.5 * h), (centre + h).min(theta));
    let (_, neg) = golden_section_max(|u| -shifted_overlap(model, u), lo, hi, 1e-9 * theta);
    let kappa = v_min.min(-neg);
    if kappa <= VANISHING_OVERLAP {
        return Err(Error::VanishingOverlap(format!("κ({theta}) = {kappa:e}")));
    }
    Ok(kappa.min(1.0))
}

/// Parameters at threshold `Θ`.
pub fn success_prob(model: &LifetimeModel, theta: f64) -> Result<BoundParameters> {
    let xi = lorden_xi(model)?;
    params_with_xi(model, xi, theta)
}

fn params_with_xi(model: &LifetimeModel, xi: f64, theta: f64) -> Result<BoundParameters> {
    if !(theta > xi) {
        return Err(Error::Domain(format!(
            "threshold Θ = {theta} must exceed Ξ = {xi}"
        )));
    }
    let kappa = kappa_of_theta(model, theta, DEFAULT_U_GRID)?;
    let p0 = 1.0 - xi / theta;
    Ok(BoundParameters {
        theta,
        xi,
        kappa,
        p0,
        varkappa: p0 * kappa,
    })
}

/// `Θ_k = Ξ (Θ_max/Ξ)^{k/n}`, `k = 1..n`.
pub fn theta_grid(xi: f64, theta_max: f64, n: usize) -> Vec<f64> {
    let ratio = theta_max / xi;
    (1..=n)
        .map(|k| {
            if k == n {
                theta_max
            } else {
                xi * ratio.powf(k as f64 / n as f64)
            }
        })
        .collect()
}

/// Maximize `score(Θ)` over `(Ξ, Θ_max]`: log grid, then golden section.
fn optimize_over_theta<S>(
    model: &LifetimeModel,
    theta_max: f64,
    score: S,
) -> Result<(f64, BoundParameters)>
where
    S: Fn(&BoundParameters) -> Result<f64> + Sync,
{
    let xi = lorden_xi(model)?;
    if !(theta_max > xi) {
        return Err(Error::Domain(format!(
            "Θ_max = {theta_max} must exceed Ξ = {xi}"
        )));
    }
    let eval = |theta: f64| -> Result<Option<(BoundParameters, f64)>> {
        match params_with_xi(model, xi, theta) {
            Ok(p) => Ok(Some((p, score(&p)?))),
            Err(Error::VanishingOverlap(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let grid = theta_grid(xi, theta_max, THETA_GRID);
    let scored = grid
        .par_iter()
        .map(|&t| eval(t))
        .collect::<Result<Vec<_>>>()?;
    let Some(best) = (0..grid.len())
        .filter(|&i| scored[i].is_some())
        .max_by(|&i, &j| {
            let (a, b) = (scored[i].unwrap().1, scored[j].unwrap().1);
            a.total_cmp(&b)
        })
    else {
        return Err(Error::VanishingOverlap(format!(
            "ϰ(Θ) <= {VANISHING_OVERLAP:e} on ({xi}, {theta_max}]"
        )));
    };
    let lo = if best == 0 { xi } else { grid[best - 1] };
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (theta, _) = golden_section_max(
        |t| match eval(t) {
            Ok(Some((_, s))) => s,
            _ => f64::NEG_INFINITY,
        },
        lo,
        hi,
        1e-6 * theta_max,
    );
    let (grid_params, grid_score) = scored[best].unwrap();
    match eval(theta)? {
        Some((p, s)) if s >= grid_score => Ok((theta, p)),
        _ => Ok((grid_params.theta, grid_params)),
    }
}

/// `Θ*` maximizing `ϰ(Θ)` over `(Ξ, Θ_max]`.
pub fn optimize_theta(model: &LifetimeModel, theta_max: f64) -> Result<(f64, BoundParameters)> {
    optimize_over_theta(model, theta_max, |p| Ok(p.varkappa))
}

/// `Θ*` minimizing `Υ̃(ℓ, b, Θ)` over `(Ξ, Θ_max]`.
pub fn optimize_theta_upsilon(
    model: &LifetimeModel,
    ell: u32,
    b: f64,
    theta_max: f64,
    form: SeriesForm,
) -> Result<(f64, BoundParameters)> {
    let t1 = stationary_t1_moment_bound(model, b, ell)?;
    let xi_moment = model.moment(ell)?;
    optimize_over_theta(model, theta_max, |p| {
        let a = attempt_moment(p.varkappa, ell);
        let s = series_s(p.varkappa, ell, form).value;
        Ok(-(a * t1 + xi_moment * s))
    })
}

/// Sum `Σ_{n≥1} term(n)` until the terms, once decreasing, fall below
/// `SERIES_REL_TOL` of the partial sum.
fn sum_series<T: Fn(usize) -> f64>(term: T) -> SeriesSum {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for n in 1..=SERIES_CAP {
        let t = term(n);
        sum += t;
        if t <= prev && t <= SERIES_REL_TOL * sum {
            return SeriesSum {
                value: sum,
                terms: n,
                capped: false,
            };
        }
        prev = t;
    }
    warn!("series truncated at {SERIES_CAP} terms");
    SeriesSum {
        value: sum,
        terms: SERIES_CAP,
        capped: true,
    }
}

/// `E(ν+1)^{ℓ−1}` for `P(ν = n) = ϰ(1−ϰ)^{n−1}`, `n ≥ 1`, with truncation info.
pub fn attempt_moment_series(varkappa: f64, ell: u32) -> SeriesSum {
    if ell <= 1 {
        return SeriesSum {
            value: 1.0,
            terms: 0,
            capped: false,
        };
    }
    let x = 1.0 - varkappa;
    let ln_x = x.ln();
    let power = (ell - 1) as i32;
    sum_series(|n| {
        let weight = if n == 1 {
            1.0
        } else {
            ((n - 1) as f64 * ln_x).exp()
        };
        varkappa * weight * ((n + 1) as f64).powi(power)
    })
}

/// `E(ν+1)^{ℓ−1}`.
pub fn attempt_moment(varkappa: f64, ell: u32) -> f64 {
    attempt_moment_series(varkappa, ell).value
}

/// `Σ_{i≥1} (i+1)^p (1−ϰ)^{i−1}` by direct summation.
pub fn series_direct(varkappa: f64, power: u32) -> SeriesSum {
    let ln_x = (1.0 - varkappa).ln();
    sum_series(|i| {
        let weight = if i == 1 {
            1.0
        } else {
            ((i - 1) as f64 * ln_x).exp()
        };
        weight * ((i + 1) as f64).powi(power as i32)
    })
}

/// `Σ_{i≥1} (i+1)² x^{i−1} = (4 − 3x + x²)/(1 − x)³` with `x = 1 − ϰ`.
pub fn series_closed_form(varkappa: f64) -> f64 {
    let x = 1.0 - varkappa;
    (4.0 - 3.0 * x + x * x) / (varkappa * varkappa * varkappa)
}

/// The series factor of `Υ`.
pub fn series_s(varkappa: f64, ell: u32, form: SeriesForm) -> SeriesSum {
    match form {
        SeriesForm::Strict if ell > 2 => series_direct(varkappa, ell),
        _ => SeriesSum {
            value: series_closed_form(varkappa),
            terms: 0,
            capped: false,
        },
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn residual_moments(model: &LifetimeModel, b: f64, ell: u32) -> Result<Vec<f64>> {
    let residual = residual_model(model, b)?;
    (0..=ell).map(|k| residual.moment(k)).collect()
}

fn binomial_convolution(a: &[f64], c: &[f64], ell: u32) -> f64 {
    (0..=ell)
        .map(|k| binomial(ell, k) * a[k as usize] * c[(ell - k) as usize])
        .sum()
}

/// `E(t₁ + t₁′)ˡ` for independent `t₁ ~ F_b`, `t₁′ ~ F_{b′}`.
pub fn t1_moment_bound(model: &LifetimeModel, b: f64, b_prime: f64, ell: u32) -> Result<f64> {
    let m = residual_moments(model, b, ell)?;
    let m_prime = residual_moments(model, b_prime, ell)?;
    Ok(binomial_convolution(&m, &m_prime, ell))
}

/// `∫ E t₁′ʲ dF̃(b′) = (1/μ) ∫₀^∞ ∫₀^∞ sʲ f(s+b′) ds db′`.
pub fn stationary_residual_moment(model: &LifetimeModel, j: u32) -> Result<f64> {
    if j == 0 {
        return Ok(1.0);
    }
    if !model.moment_finite(j + 1) {
        return Err(Error::DivergentMoment(format!(
            "stationary E t₁′^{j} needs E ξ^{} < ∞ for {model:?}",
            j + 1
        )));
    }
    let (_, hi) = model.support();
    let breaks = model.breakpoints();
    let inner = |bp: f64| {
        let shifted: Vec<f64> = breaks.iter().map(|x| x - bp).collect();
        integrate_with(
            &|s: f64| {
                let d = model.pdf(s + bp);
                if d == 0.0 {
                    0.0
                } else {
                    s.powi(j as i32) * d
                }
            },
            0.0,
            hi - bp,
            &shifted,
            Tolerance::default(),
        )
        .value
    };
    let q = integrate_with(&inner, 0.0, hi, &breaks, Tolerance::default());
    if !q.value.is_finite() {
        return Err(Error::DivergentMoment(format!(
            "stationary E t₁′^{j} did not converge"
        )));
    }
    Ok(q.value / model.mean())
}

/// `∫ E(t₁ + t₁′)ˡ dF̃(b′)`.
pub fn stationary_t1_moment_bound(model: &LifetimeModel, b: f64, ell: u32) -> Result<f64> {
    let m = residual_moments(model, b, ell)?;
    let m_tilde = (0..=ell)
        .map(|j| stationary_residual_moment(model, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(binomial_convolution(&m, &m_tilde, ell))
}

/// The factors of `Υ = E(ν+1)^{ℓ−1} · E T₁ˡ + Eξˡ · S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpsilonTerms {
    pub attempt_moment: f64,
    pub t1_moment: f64,
    pub xi_moment: f64,
    pub series: f64,
    pub truncated: bool,
}

impl UpsilonTerms {
    fn new(varkappa: f64, ell: u32, t1_moment: f64, xi_moment: f64, form: SeriesForm) -> Self {
        let a = attempt_moment_series(varkappa, ell);
        let s = series_s(varkappa, ell, form);
        UpsilonTerms {
            attempt_moment: a.value,
            t1_moment,
            xi_moment,
            series: s.value,
            truncated: a.capped || s.capped,
        }
    }

    pub fn value(&self) -> f64 {
        self.attempt_moment * self.t1_moment + self.xi_moment * self.series
    }
}

/// `Υ(ℓ, b, b′, Θ)` with its factors.
pub fn upsilon_terms(
    model: &LifetimeModel,
    ell: u32,
    b: f64,
    b_prime: f64,
    params: &BoundParameters,
    form: SeriesForm,
) -> Result<UpsilonTerms> {
    check_ell(ell)?;
    let t1 = t1_moment_bound(model, b, b_prime, ell)?;
    Ok(UpsilonTerms::new(
        params.varkappa,
        ell,
        t1,
        model.moment(ell)?,
        form,
    ))
}

/// `Υ̃(ℓ, b, Θ)` with its factors (the `T₁` factor averaged over `b′ ~ F̃`).
pub fn upsilon_integrated_terms(
    model: &LifetimeModel,
    ell: u32,
    b: f64,
    params: &BoundParameters,
    form: SeriesForm,
) -> Result<UpsilonTerms> {
    check_ell(ell)?;
    let t1 = stationary_t1_moment_bound(model, b, ell)?;
    Ok(UpsilonTerms::new(
        params.varkappa,
        ell,
        t1,
        model.moment(ell)?,
        form,
    ))
}

/// `Υ(ℓ, b, b′, Θ)`.
pub fn upsilon(model: &LifetimeModel, ell: u32, b: f64, b_prime: f64, theta: f64) -> Result<f64> {
    let params = success_prob(model, theta)?;
    Ok(upsilon_terms(model, ell, b, b_prime, &params, SeriesForm::Printed)?.value())
}

/// `Υ̃(ℓ, b, Θ)`.
pub fn upsilon_integrated(model: &LifetimeModel, ell: u32, b: f64, theta: f64) -> Result<f64> {
    let params = success_prob(model, theta)?;
    Ok(upsilon_integrated_terms(model, ell, b, &params, SeriesForm::Printed)?.value())
}

fn check_ell(ell: u32) -> Result<()> {
    if ell == 0 {
        return Err(Error::Domain("moment order ℓ must be at least 1".into()));
    }
    Ok(())
}

/// `min(1, Υ̃ / tˡ)`.
pub fn polynomial_rate_curve(upsilon_tilde: f64, ell: u32, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("rate curve needs t > 0, got {t}")));
    }
    Ok((upsilon_tilde / t.powi(ell as i32)).min(1.0))
}

/// Polynomial bound with its ingredients and a sampled curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    #[serde(flatten)]
    pub params: BoundParameters,
    pub ell: u32,
    pub b: f64,
    pub b_prime: f64,
    pub series_form: SeriesForm,
    pub upsilon: f64,
    pub upsilon_tilde: f64,
    pub attempt_moment: f64,
    pub upsilon_terms: UpsilonTerms,
    pub upsilon_tilde_terms: UpsilonTerms,
    /// `(t, min(1, Υ̃/tˡ))`.
    pub rate_curve: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

impl BoundReport {
    pub fn bound_at(&self, t: f64) -> Result<f64> {
        polynomial_rate_curve(self.upsilon_tilde, self.ell, t)
    }
}

/// Assemble the polynomial report at the given parameters.
pub fn bound_report(
    model: &LifetimeModel,
    ell: u32,
    b: f64,
    b_prime: f64,
    params: BoundParameters,
    form: SeriesForm,
    t_grid: &[f64],
) -> Result<BoundReport> {
    let terms = upsilon_terms(model, ell, b, b_prime, &params, form)?;
    let tilde = upsilon_integrated_terms(model, ell, b, &params, form)?;
    let upsilon_tilde = tilde.value();
    let rate_curve = t_grid
        .iter()
        .map(|&t| Ok((t, polynomial_rate_curve(upsilon_tilde, ell, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    if terms.truncated || tilde.truncated {
        warnings.push(format!(
            "series truncated at {SERIES_CAP} terms; values are lower estimates"
        ));
    }
    Ok(BoundReport {
        params,
        ell,
        b,
        b_prime,
        series_form: form,
        upsilon: terms.value(),
        upsilon_tilde,
        attempt_moment: terms.attempt_moment,
        upsilon_terms: terms,
        upsilon_tilde_terms: tilde,
        rate_curve,
        warnings,
    })
}

/// Exponential bound `E e^{βτ} ≤ K_β`, `‖P_t^b − F̃‖_TV ≤ K̃_β e^{−βt}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpBoundReport {
    #[serde(flatten)]
    pub params: BoundParameters,
    pub alpha: f64,
    pub beta: f64,
    pub b: f64,
    pub b_prime: f64,
    pub mgf: f64,
    pub k_beta: f64,
    pub k_beta_tilde: f64,
    /// `(1 − ϰ) m(β)`.
    pub mgf_margin: f64,
    /// `(t, min(1, K̃_β e^{−βt}))`.
    pub rate_curve: Vec<(f64, f64)>,
}

impl ExpBoundReport {
    pub fn bound_at(&self, t: f64) -> f64 {
        (self.k_beta_tilde * (-self.beta * t).exp()).min(1.0)
    }

    /// Time after which the curve drops below 1.
    pub fn onset(&self) -> f64 {
        (self.k_beta_tilde.ln() / self.beta).max(0.0)
    }
}

fn mgf_of(model: &dyn Lifetime, beta: f64) -> f64 {
    let (lo, hi) = model.support();
    let q = integrate_with(
        &|s: f64| {
            let d = model.pdf(s);
            if d == 0.0 {
                0.0
            } else {
                (beta * s).exp() * d
            }
        },
        lo,
        hi,
        &model.breakpoints(),
        Tolerance::default(),
    );
    if q.converged && q.value.is_finite() {
        q.value
    } else {
        f64::INFINITY
    }
}

/// `m(β) = E e^{βξ}` by quadrature (`+∞` when it does not converge).
pub fn mgf(model: &LifetimeModel, beta: f64) -> f64 {
    mgf_of(model, beta)
}

/// `m_b(β)`, the MGF of the residual law `F_b`.
pub fn residual_mgf(model: &LifetimeModel, b: f64, beta: f64) -> Result<f64> {
    Ok(mgf_of(&residual_model(model, b)?, beta))
}

/// `∫ m_{b′}(β) dF̃(b′) = (1/μ) ∫₀^∞ ∫₀^∞ e^{βs} f(s+b′) ds db′`.
pub fn stationary_residual_mgf(model: &LifetimeModel, beta: f64) -> f64 {
    let (_, hi) = model.support();
    let breaks = model.breakpoints();
    let inner = |bp: f64| {
        let shifted: Vec<f64> = breaks.iter().map(|x| x - bp).collect();
        integrate_with(
            &|s: f64| {
                let d = model.pdf(s + bp);
                if d == 0.0 {
                    0.0
                } else {
                    (beta * s).exp() * d
                }
            },
            0.0,
            hi - bp,
            &shifted,
            Tolerance::default(),
        )
        .value
    };
    integrate_with(&inner, 0.0, hi, &breaks, Tolerance::default()).value / model.mean()
}

/// Largest admissible `β ∈ (0, α)` and the constants `K_β`, `K̃_β`.
pub fn exponential_rate(
    model: &LifetimeModel,
    b: f64,
    b_prime: f64,
    params: BoundParameters,
    alpha: f64,
    t_grid: &[f64],
) -> Result<ExpBoundReport> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("α must be positive, got {alpha}")));
    }
    if !model.mgf_finite(alpha) {
        return Err(Error::ExponentialBoundUnavailable(format!(
            "E e^(αξ) is infinite at α = {alpha} for {model:?}"
        )));
    }
    let x = 1.0 - params.varkappa;
    let admissible = |beta: f64| x * mgf(model, beta) <= 1.0 - MGF_SLACK;
    if !admissible(0.0) {
        return Err(Error::ExponentialBoundUnavailable(format!(
            "ϰ = {} leaves no room for (1 − ϰ) m(β) <= 1 − {MGF_SLACK}",
            params.varkappa
        )));
    }
    let (mut lo, mut hi) = (0.0, alpha);
    while hi - lo > BETA_WIDTH {
        let mid = 0.5 * (lo + hi);
        if admissible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo <= 0.0 {
        return Err(Error::ExponentialBoundUnavailable(format!(
            "no β in (0, {alpha}) with (1 − ϰ) m(β) <= 1 − {MGF_SLACK}"
        )));
    }
    let beta = lo;
    let m = mgf(model, beta);
    let geometric = params.varkappa * m / (1.0 - x * m);
    let m_b = residual_mgf(model, b, beta)?;
    let m_b_prime = residual_mgf(model, b_prime, beta)?;
    let k_beta = m_b * m_b_prime * geometric;
    let k_beta_tilde = m_b * stationary_residual_mgf(model, beta) * geometric;
    let mut report = ExpBoundReport {
        params,
        alpha,
        beta,
        b,
        b_prime,
        mgf: m,
        k_beta,
        k_beta_tilde,
        mgf_margin: x * m,
        rate_curve: Vec::new(),
    };
    report.rate_curve = t_grid.iter().map(|&t| (t, report.bound_at(t))).collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp1() -> LifetimeModel {
        LifetimeModel::exponential(1.0).unwrap()
    }

    #[test]
    fn lorden_examples() {
        assert!((lorden_xi(&exp1()).unwrap() - 2.0).abs() < 1e-9);
        let u = LifetimeModel::uniform(0.0, 1.0).unwrap();
        assert!((lorden_xi(&u).unwrap() - 2.0 / 3.0).abs() < 1e-9);
        let heavy = LifetimeModel::lomax(1.5, 1.0).unwrap();
        assert!(matches!(lorden_xi(&heavy), Err(Error::DivergentMoment(_))));
    }

    #[test]
    fn exponential_kappa() {
        for theta in [1.0, 3.0] {
            let k = kappa_of_theta(&exp1(), theta, DEFAULT_U_GRID).unwrap();
            assert!((k - (-theta).exp()).abs() < 1e-7);
        }
    }

    #[test]
    fn uniform_kappa_and_vanishing() {
        let u = LifetimeModel::uniform(0.0, 1.0).unwrap();
        let k = kappa_of_theta(&u, 0.9, DEFAULT_U_GRID).unwrap();
        assert!((k - 0.1).abs() < 1e-7);
        assert!(matches!(
            kappa_of_theta(&u, 1.0, 50),
            Err(Error::VanishingOverlap(_))
        ));
        let p = success_prob(&u, 0.9).unwrap();
        assert!((p.p0 - (1.0 - (2.0 / 3.0) / 0.9)).abs() < 1e-9);
        assert!((p.varkappa - p.p0 * p.kappa).abs() < 1e-15);
    }

    #[test]
    fn success_prob_examples() {
        let p = success_prob(&exp1(), 3.0).unwrap();
        assert!((p.p0 - 1.0 / 3.0).abs() < 1e-9);
        assert!((p.varkappa - (-3f64).exp() / 3.0).abs() < 1e-7);
        assert!(matches!(success_prob(&exp1(), 2.0), Err(Error::Domain(_))));
        let near = success_prob(&exp1(), 2.0 + 1e-6).unwrap();
        assert!(near.varkappa < 1e-6);
    }

    #[test]
    fn optimize_exponential() {
        let (theta, p) = optimize_theta(&exp1(), 20.0).unwrap();
        let star = 1.0 + 3f64.sqrt();
        assert!((theta - star).abs() < 1e-4, "{theta}");
        let closed = (1.0 - 2.0 / star) * (-star).exp();
        assert!((p.varkappa - closed).abs() < 1e-7);
    }

    #[test]
    fn optimize_uniform_interior() {
        let u = LifetimeModel::uniform(0.0, 1.0).unwrap();
        let (theta, _) = optimize_theta(&u, 1.0).unwrap();
        assert!(theta > 2.0 / 3.0 && theta < 1.0);
        assert!((theta - (2f64 / 3.0).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn attempt_moment_examples() {
        assert_eq!(attempt_moment(0.3, 1), 1.0);
        assert!((attempt_moment(1.0, 3) - 4.0).abs() < 1e-15);
        assert!((attempt_moment(0.5, 2) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn series_identity() {
        for vk in [0.9, 0.5, 0.1, 0.01] {
            let direct = series_direct(vk, 2).value;
            let closed = series_closed_form(vk);
            assert!(((closed - direct) / direct).abs() < 1e-10, "{vk}");
        }
        assert_eq!(series_closed_form(1.0), 4.0);
    }

    #[test]
    fn t1_moment_examples() {
        assert!((t1_moment_bound(&exp1(), 0.3, 2.0, 1).unwrap() - 2.0).abs() < 1e-9);
        assert!((t1_moment_bound(&exp1(), 0.0, 0.0, 2).unwrap() - 6.0).abs() < 1e-8);
    }

    #[test]
    fn stationary_moments_match_closed_form() {
        for m in [
            exp1(),
            LifetimeModel::uniform(0.0, 1.0).unwrap(),
            LifetimeModel::gamma(2.0, 1.0).unwrap(),
        ] {
            for j in 1..=3u32 {
                let got = stationary_residual_moment(&m, j).unwrap();
                let want = m.moment(j + 1).unwrap() / ((j + 1) as f64 * m.mean());
                assert!(((got - want) / want).abs() < 1e-7, "{m:?} j={j}");
            }
        }
    }

    #[test]
    fn upsilon_memoryless() {
        let theta = 1.0 + 3f64.sqrt();
        let a = upsilon(&exp1(), 2, 0.0, 0.0, theta).unwrap();
        let b = upsilon(&exp1(), 2, 0.0, 5.0, theta).unwrap();
        let tilde = upsilon_integrated(&exp1(), 2, 0.0, theta).unwrap();
        assert!(((a - b) / a).abs() < 1e-9);
        assert!(((a - tilde) / a).abs() < 1e-7);
    }

    #[test]
    fn rate_curve_clamps() {
        assert_eq!(polynomial_rate_curve(16.0, 2, 8.0).unwrap(), 0.25);
        assert_eq!(polynomial_rate_curve(16.0, 2, 2.0).unwrap(), 1.0);
        assert!(polynomial_rate_curve(16.0, 2, 0.0).is_err());
    }

    #[test]
    fn exponential_rate_for_exp1() {
        let (_, p) = optimize_theta(&exp1(), 20.0).unwrap();
        let r = exponential_rate(&exp1(), 0.0, 0.0, p, 0.5, &[1.0]).unwrap();
        let want = 1.0 - (1.0 - p.varkappa) / (1.0 - MGF_SLACK);
        assert!((r.beta - want).abs() < 2e-6);
        assert!(r.beta < p.varkappa);
        assert!(r.mgf_margin <= 1.0 - MGF_SLACK);
        let st = stationary_residual_mgf(&exp1(), r.beta);
        assert!((st - (r.mgf - 1.0) / r.beta).abs() < 1e-7);
    }

    #[test]
    fn exponential_rate_unavailable() {
        let lomax = LifetimeModel::lomax(3.0, 1.0).unwrap();
        let p = BoundParameters {
            theta: 3.0,
            xi: 1.0,
            kappa: 0.5,
            p0: 0.5,
            varkappa: 0.25,
        };
        assert!(matches!(
            exponential_rate(&lomax, 0.0, 0.0, p, 0.1, &[]),
            Err(Error::ExponentialBoundUnavailable(_))
        ));
        let tiny = BoundParameters {
            varkappa: 1e-4,
            ..p
        };
        assert!(matches!(
            exponential_rate(&exp1(), 0.0, 0.0, tiny, 0.5, &[]),
            Err(Error::ExponentialBoundUnavailable(_))
        ));
    }
}
