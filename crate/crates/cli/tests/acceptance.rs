//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::{Command, ExitCode};
use std::time::Instant;

use regen_core::bounds::{
    exponential_rate, kappa_of_theta, lorden_xi, optimize_theta, series_closed_form, series_direct,
    DEFAULT_U_GRID,
};
use regen_core::coupling::{
    common_part, couple_n, couple_pair, coupling_time_samples, decompose, CouplingFault,
};
use regen_core::distributions::{
    cdf_from_hazard_with_breaks, stationary_overshoot, Lifetime, LifetimeModel,
};
use regen_core::stats::{binomial_se, ks_one_sample, KS_THRESHOLD_1E5};
use regen_core::stream::{substream, UniformSource};
use regen_core::verify::{
    phi_moment_estimate, stationary_coupling_times, verify_coupling_marginals, verify_lorden,
    verify_polynomial_bound, verify_tau_tail, MarginalConfig, PhiKind, VerifyConfig,
};
use regen_core::Error;

const SEED: u64 = 20_240_601;
const N: usize = 100_000;
/// Twelve KS comparisons at α = 0.01 share this stream; the reference copies come from it too.
const MARGINAL_SEED: u64 = SEED + 33;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn exp1() -> LifetimeModel {
    LifetimeModel::exponential(1.0).unwrap()
}

fn matrix() -> Vec<LifetimeModel> {
    vec![
        exp1(),
        LifetimeModel::uniform(0.0, 1.0).unwrap(),
        LifetimeModel::gamma(2.0, 1.0).unwrap(),
        LifetimeModel::hyperexp(vec![0.5, 0.5], vec![1.0, 2.0]).unwrap(),
    ]
}

/// `∫ min(f, g)` by a dense midpoint rule.
fn midpoint_overlap(models: &[&dyn Lifetime], hi: f64, n: usize) -> f64 {
    let h = hi / n as f64;
    (0..n)
        .map(|i| {
            let s = (i as f64 + 0.5) * h;
            models
                .iter()
                .map(|m| m.pdf(s))
                .fold(f64::INFINITY, f64::min)
        })
        .sum::<f64>()
        * h
}

fn criterion_1() -> Outcome {
    let mut fails = Vec::new();
    let mut check = |name: &str, got: f64, want: f64, tol: f64| {
        if (got - want).abs().is_nan() || (got - want).abs() > tol {
            fails.push(format!("{name}: {got} vs {want}"));
        }
    };
    let e = exp1();
    let u = LifetimeModel::uniform(0.0, 1.0).unwrap();
    check("Ξ(Exp(1))", lorden_xi(&e).unwrap(), 2.0, 1e-9);
    check("Ξ(U[0,1])", lorden_xi(&u).unwrap(), 2.0 / 3.0, 1e-9);
    check(
        "κ(Exp(1), 3)",
        kappa_of_theta(&e, 3.0, DEFAULT_U_GRID).unwrap(),
        (-3f64).exp(),
        1e-6,
    );
    check(
        "F̃_U(0.5)",
        stationary_overshoot(&u).unwrap().cdf(0.5),
        0.75,
        1e-9,
    );
    let (theta, p) = optimize_theta(&e, 20.0).unwrap();
    check("Θ*", theta, 1.0 + 3f64.sqrt(), 1e-4);
    // grid oracle over the analytic ϰ(Θ) = (1 − 2/Θ) e^{−Θ}
    let grid_max = (1..=200_000)
        .map(|k| 2.0 + 18.0 * k as f64 / 200_000.0)
        .map(|t| (1.0 - 2.0 / t) * (-t).exp())
        .fold(0.0, f64::max);
    check("ϰ* vs grid", p.varkappa, grid_max, 1e-5);
    check("ϰ*", p.varkappa, 0.01744, 1e-5);
    let detail = format!("Θ* = {theta:.7}, ϰ* = {:.7}", p.varkappa);
    if fails.is_empty() {
        outcome(true, detail)
    } else {
        outcome(false, fails.join("; "))
    }
}

fn criterion_2() -> Outcome {
    let pairs = [
        (
            LifetimeModel::uniform(0.0, 2.0).unwrap(),
            LifetimeModel::uniform(1.0, 3.0).unwrap(),
            3.0,
        ),
        (exp1(), LifetimeModel::gamma(2.0, 1.5).unwrap(), 60.0),
        (
            LifetimeModel::weibull(1.5, 1.0).unwrap(),
            LifetimeModel::hyperexp(vec![0.3, 0.7], vec![0.5, 2.0]).unwrap(),
            80.0,
        ),
    ];
    let mut worst_ks: f64 = 0.0;
    let mut fails = Vec::new();
    for (idx, (a, b, hi)) in pairs.iter().enumerate() {
        let dec = decompose(a, b).unwrap();
        let kappa = midpoint_overlap(&[a, b], *hi, 2_000_000);
        if (common_part(a, b) - kappa).abs() > 1e-6 {
            fails.push(format!(
                "pair {idx}: κ quadrature {} vs oracle {kappa}",
                common_part(a, b)
            ));
        }
        let mut rng = substream(SEED + 2, idx as u64);
        let (mut xs, mut ys, mut equal) = (Vec::with_capacity(N), Vec::with_capacity(N), 0usize);
        for _ in 0..N {
            let (u, v, w) = (rng.next_uniform(), rng.next_uniform(), rng.next_uniform());
            let (x, y, _) = couple_pair(&dec, u, v, w);
            equal += (x == y) as usize;
            xs.push(x);
            ys.push(y);
        }
        let ks = ks_one_sample(&xs, |s| a.cdf(s)).max(ks_one_sample(&ys, |s| b.cdf(s)));
        worst_ks = worst_ks.max(ks);
        let freq = equal as f64 / N as f64;
        if ks >= KS_THRESHOLD_1E5 || (freq - kappa).abs() > 3.0 * binomial_se(kappa, N) {
            fails.push(format!(
                "pair {idx}: KS {ks:.5}, P(equal) {freq:.5} vs κ {kappa:.5}"
            ));
        }
    }
    let triple = [
        exp1(),
        LifetimeModel::gamma(2.0, 2.0).unwrap(),
        LifetimeModel::weibull(2.0, 1.0).unwrap(),
    ];
    let refs: Vec<&dyn Lifetime> = triple.iter().map(|m| m as &dyn Lifetime).collect();
    let kappa = midpoint_overlap(&refs, 40.0, 2_000_000);
    let mut rng = substream(SEED + 2, 99);
    let mut cols = vec![Vec::new(); 3];
    let mut equal = 0usize;
    for _ in 0..N {
        let (u, v) = (rng.next_uniform(), rng.next_uniform());
        let w = [rng.next_uniform(), rng.next_uniform(), rng.next_uniform()];
        let (xs, _) = couple_n(&refs, u, v, &w).unwrap();
        equal += (xs[0] == xs[1] && xs[1] == xs[2]) as usize;
        for (c, x) in cols.iter_mut().zip(xs) {
            c.push(x);
        }
    }
    let ks = triple
        .iter()
        .zip(&cols)
        .map(|(m, c)| ks_one_sample(c, |s| m.cdf(s)))
        .fold(0.0, f64::max);
    worst_ks = worst_ks.max(ks);
    let freq = equal as f64 / N as f64;
    if ks >= KS_THRESHOLD_1E5 || (freq - kappa).abs() > 3.0 * binomial_se(kappa, N) {
        fails.push(format!(
            "triple: KS {ks:.5}, P(equal) {freq:.5} vs κ {kappa:.5}"
        ));
    }
    if fails.is_empty() {
        outcome(true, format!("max KS {worst_ks:.5} < {KS_THRESHOLD_1E5}"))
    } else {
        outcome(false, fails.join("; "))
    }
}

/// Coupled-marginal KS checks for Exp(1), (b, b′) = (0, 3), at `Θ*` and `1.1 Ξ`.
fn marginal_runs(fault: Option<CouplingFault>) -> (bool, String) {
    let e = exp1();
    let (theta_star, _) = optimize_theta(&e, 20.0).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for theta in [theta_star, 1.1 * lorden_xi(&e).unwrap()] {
        let cfg = MarginalConfig {
            b: 0.0,
            b_prime: 3.0,
            theta,
            checkpoints: vec![1.0, 5.0, 20.0],
            n_traces: N,
            horizon: 1e4,
            seed: MARGINAL_SEED,
            alpha: 0.01,
        };
        let r = verify_coupling_marginals(&e, &cfg, fault).unwrap();
        pass &= r.pass;
        let worst = r
            .records
            .iter()
            .map(|x| x.ks.max(x.ks_prime))
            .fold(0.0, f64::max);
        parts.push(format!(
            "Θ={theta:.3}: max KS {worst:.5} (crit {:.5})",
            r.records[0].critical
        ));
    }
    (pass, parts.join(", "))
}

fn criterion_3() -> Outcome {
    let (pass, detail) = marginal_runs(None);
    outcome(pass, detail)
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, m) in matrix().iter().enumerate() {
        let r = verify_lorden(m, 50.0 * m.mean(), N, SEED + 40 + i as u64).unwrap();
        pass &= r.pass;
        parts.push(format!(
            "{} {:.4}±{:.4} ≤ {:.4}",
            m.family(),
            r.mean,
            r.se,
            r.xi
        ));
    }
    outcome(pass, parts.join(", "))
}

fn polynomial_config(m: &LifetimeModel, b: f64, ell: u32, scale: f64) -> VerifyConfig {
    let xi = lorden_xi(m).unwrap();
    let (theta, _) = optimize_theta(m, 20.0 * xi).unwrap();
    VerifyConfig {
        b,
        ell,
        theta,
        series_form: Default::default(),
        t_grid: [1.0, 2.0, 5.0, 10.0, 20.0, 50.0]
            .iter()
            .map(|k| k * m.mean())
            .collect(),
        n_paths: N,
        n_bins: 50,
        seed: SEED + 5,
        bound_scale: scale,
    }
}

fn criterion_5() -> Outcome {
    let mut fails = Vec::new();
    let mut undefined = Vec::new();
    let mut passed = 0;
    for m in matrix() {
        let xi = lorden_xi(&m).unwrap();
        for b in [0.0, 2.0 * xi] {
            for ell in [1, 2] {
                match verify_polynomial_bound(&m, &polynomial_config(&m, b, ell, 1.0)) {
                    Ok(r) if r.pass => passed += 1,
                    Ok(r) => {
                        fails.push(format!("{} b={b:.3} ℓ={ell}: {:?}", m.family(), r.records))
                    }
                    // an age beyond the support has no residual law
                    Err(Error::Saturation { .. }) if m.sf(b) == 0.0 => {
                        undefined.push(format!("{} b={b:.3} ℓ={ell}", m.family()))
                    }
                    Err(e) => fails.push(format!("{} b={b:.3} ℓ={ell}: {e}", m.family())),
                }
            }
        }
    }
    let detail = format!(
        "{passed} cells pass; undefined (F(b) = 1, rejected with saturation error): [{}]",
        undefined.join(", ")
    );
    if fails.is_empty() {
        outcome(true, detail)
    } else {
        outcome(false, format!("{detail}; failures: {}", fails.join("; ")))
    }
}

fn criterion_6() -> Outcome {
    let e = exp1();
    let (theta, p) = optimize_theta(&e, 20.0).unwrap();
    let (b, b_prime) = (0.0, 3.0);
    let r = match exponential_rate(&e, b, b_prime, p, 0.5, &[]) {
        Ok(r) => r,
        Err(err) => return outcome(false, format!("exponential_rate: {err}")),
    };
    let taus = coupling_time_samples(&e, b, b_prime, theta, 10_000, 1e4, SEED + 6).unwrap();
    let (mgf_hat, se) = phi_moment_estimate(&taus, PhiKind::Exponential { beta: r.beta });
    let stationary = stationary_coupling_times(&e, b, theta, 10_000, 1e4, SEED + 7).unwrap();
    let grid: Vec<f64> = (1..=20).map(|k| k as f64 * 10.0).collect();
    let tail = verify_tau_tail(
        &stationary,
        PhiKind::Exponential { beta: r.beta },
        r.k_beta_tilde,
        &grid,
    )
    .unwrap();
    let pass = r.beta < p.varkappa && mgf_hat <= r.k_beta + 3.0 * se && tail.pass;
    outcome(
        pass,
        format!(
            "β = {:.6} < ϰ = {:.6}; Ê e^(βτ) = {mgf_hat:.4}±{se:.4} ≤ K_β = {:.3}; tail vs K̃_β e^(−βt) ({:.3}) pass = {}",
            r.beta, p.varkappa, r.k_beta, r.k_beta_tilde, tail.pass
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut fails = Vec::new();
    let mut worst_series: f64 = 0.0;
    for vk in [0.9, 0.5, 0.1, 0.01] {
        let direct = series_direct(vk, 2).value;
        let rel = ((series_closed_form(vk) - direct) / direct).abs();
        worst_series = worst_series.max(rel);
        if rel >= 1e-10 {
            fails.push(format!("series at ϰ={vk}: rel {rel:e}"));
        }
    }
    let families = [
        exp1(),
        LifetimeModel::gamma(0.7, 2.0).unwrap(),
        LifetimeModel::gamma(2.0, 1.0).unwrap(),
        LifetimeModel::weibull(0.8, 1.0).unwrap(),
        LifetimeModel::weibull(2.0, 1.5).unwrap(),
        LifetimeModel::uniform(0.0, 1.0).unwrap(),
        LifetimeModel::uniform(1.0, 3.0).unwrap(),
        LifetimeModel::hyperexp(vec![0.5, 0.5], vec![1.0, 2.0]).unwrap(),
        LifetimeModel::tabulated(vec![0.0, 1.0, 2.0, 4.0], vec![0.2, 0.6, 0.3, 0.0]).unwrap(),
        LifetimeModel::lomax(3.0, 1.0).unwrap(),
    ];
    let mut worst_hazard: f64 = 0.0;
    for m in &families {
        for p in [0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            let s = m.quantile(p).unwrap();
            let got =
                cdf_from_hazard_with_breaks(|u| m.hazard(u).unwrap_or(0.0), s, &m.breakpoints())
                    .unwrap();
            let err = (got - m.cdf(s)).abs();
            worst_hazard = worst_hazard.max(err);
            if err >= 1e-7 {
                fails.push(format!("hazard round trip {} at {s}: {err:e}", m.family()));
            }
        }
    }
    let detail =
        format!("series rel err ≤ {worst_series:.1e}, hazard round trip ≤ {worst_hazard:.1e}");
    if fails.is_empty() {
        outcome(true, detail)
    } else {
        outcome(false, fails.join("; "))
    }
}

fn binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_regen-bounds"))
        .args(args)
        .env_remove("REGEN_BOUNDS_JOBS")
        .output()
        .expect("binary runs")
}

fn criterion_8() -> Outcome {
    let uniform = r#"{"family":"uniform","lo":0,"hi":1}"#;
    let verify = |scale: &str| {
        binary(&[
            "verify",
            "--dist",
            uniform,
            "--b",
            "0",
            "--ell",
            "1",
            "--theta",
            "auto",
            "--t-grid",
            "1,2,5,10,20,50",
            "--t-unit",
            "mean",
            "--paths",
            "100000",
            "--bins",
            "50",
            "--seed",
            "8",
            "--inject-bound-scale",
            scale,
        ])
        .status
        .code()
    };
    let (genuine, injected) = (verify("1"), verify("1e-6"));
    let (fault_pass, fault_detail) = marginal_runs(Some(CouplingFault::SkipResidualBranch));
    let pass = genuine == Some(0) && injected == Some(3) && !fault_pass;
    outcome(
        pass,
        format!(
            "verify exit {genuine:?} genuine / {injected:?} with scale 1e-6; residual-branch fault detected = {} ({fault_detail})",
            !fault_pass
        ),
    )
}

fn criterion_9() -> Outcome {
    let gamma = r#"{"family":"gamma","shape":2,"rate":1}"#;
    let couple = |jobs: &str| {
        binary(&[
            "--jobs",
            jobs,
            "couple",
            "--dist",
            gamma,
            "--b",
            "0",
            "--b-prime",
            "2",
            "--theta",
            "auto",
            "--traces",
            "4000",
            "--seed",
            "9",
        ])
    };
    let verify = |jobs: &str| {
        binary(&[
            "--jobs", jobs, "verify", "--dist", gamma, "--b", "0", "--ell", "2", "--t-grid",
            "1,5,20", "--paths", "20000", "--bins", "20", "--seed", "9",
        ])
    };
    let (c1, c4) = (couple("1"), couple("4"));
    let (v1, v4) = (verify("1"), verify("4"));
    let same_couple = c1.status.success() && c1.stdout == c4.stdout && c1.stderr == c4.stderr;
    let same_verify =
        v1.status.code() == v4.status.code() && !v1.stdout.is_empty() && v1.stdout == v4.stdout;
    outcome(
        same_couple && same_verify,
        format!("couple identical = {same_couple}, verify identical = {same_verify}"),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("analytic goldens", criterion_1),
        ("coupling-lemma contract", criterion_2),
        ("successful-coupling marginals", criterion_3),
        ("Lorden inequality, empirical", criterion_4),
        ("polynomial rate end-to-end", criterion_5),
        ("exponential rate end-to-end", criterion_6),
        ("series and quadrature oracles", criterion_7),
        ("harness sensitivity self-tests", criterion_8),
        ("reproducibility across --jobs", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = run();
        failed += (!r.pass) as usize;
        println!(
            "criterion {} [{}] {name}: {} ({:.1}s)",
            i + 1,
            if r.pass { "PASS" } else { "FAIL" },
            r.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
