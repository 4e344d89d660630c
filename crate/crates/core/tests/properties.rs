use proptest::prelude::*;

use regen_core::bounds::{attempt_moment, series_closed_form, series_direct};
use regen_core::coupling::{common_part, couple_pair, decompose};
use regen_core::distributions::{
    cdf_from_hazard_with_breaks, residual_model, stationary_overshoot, Lifetime, LifetimeModel,
};

fn family() -> impl Strategy<Value = LifetimeModel> {
    prop_oneof![
        (0.2f64..5.0).prop_map(|r| LifetimeModel::exponential(r).unwrap()),
        (0.5f64..4.0, 0.3f64..3.0).prop_map(|(k, r)| LifetimeModel::gamma(k, r).unwrap()),
        (0.6f64..3.0, 0.5f64..2.0).prop_map(|(k, l)| LifetimeModel::weibull(k, l).unwrap()),
        (0.0f64..1.0, 0.5f64..3.0).prop_map(|(a, w)| LifetimeModel::uniform(a, a + w).unwrap()),
        (0.05f64..0.95, 0.3f64..1.5, 1.5f64..5.0).prop_map(|(p, r1, r2)| LifetimeModel::hyperexp(
            vec![p, 1.0 - p],
            vec![r1, r2]
        )
        .unwrap()),
        (2.5f64..6.0, 0.5f64..2.0).prop_map(|(a, s)| LifetimeModel::lomax(a, s).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantile_is_monotone_and_inverts(m in family(), p in 0.001f64..0.999, dp in 0.0001f64..0.05) {
        let q = (p + dp).min(0.9995);
        let (x, y) = (m.quantile(p).unwrap(), m.quantile(q).unwrap());
        prop_assert!(x <= y);
        prop_assert!((m.cdf(x) - p).abs() < 1e-8);
    }

    #[test]
    fn cdf_is_monotone_and_bounded(m in family(), a in 0.0f64..5.0, d in 0.0f64..5.0) {
        let (fa, fb) = (m.cdf(a), m.cdf(a + d));
        prop_assert!((0.0..=1.0).contains(&fa) && (0.0..=1.0).contains(&fb));
        prop_assert!(fa <= fb + 1e-15);
        prop_assert!((m.sf(a) - (1.0 - fa)).abs() < 1e-12);
    }

    #[test]
    fn residual_of_residual_composes(m in family(), b in 0.0f64..0.4, c in 0.0f64..0.4, s in 0.0f64..3.0) {
        let direct = residual_model(&m, b + c).unwrap();
        let nested = residual_model(&m, b).unwrap().residual(c).unwrap();
        prop_assert!((direct.cdf(s) - nested.cdf(s)).abs() < 1e-10);
    }

    #[test]
    fn residual_at_zero_is_the_base(m in family(), s in 0.0f64..4.0) {
        let r = residual_model(&m, 0.0).unwrap();
        prop_assert!((r.cdf(s) - m.cdf(s)).abs() < 1e-12);
    }

    #[test]
    fn hazard_reconstructs_cdf(m in family(), s in 0.05f64..0.9) {
        let (lo, hi) = m.support();
        let s = lo + s * (hi.min(lo + 4.0) - lo);
        prop_assume!(m.sf(s) > 1e-6);
        let got = cdf_from_hazard_with_breaks(|u| m.hazard(u).unwrap_or(0.0), s, &m.breakpoints()).unwrap();
        prop_assert!((got - m.cdf(s)).abs() < 1e-7, "{} vs {}", got, m.cdf(s));
    }

    #[test]
    fn stationary_cdf_matches_integrated_survival(m in family(), s in 0.0f64..4.0) {
        let st = stationary_overshoot(&m).unwrap();
        prop_assert!((st.cdf(s) - m.integrated_sf(s) / m.mean()).abs() < 1e-10);
    }

    #[test]
    fn coupling_is_symmetric_and_bounded(a in family(), b in family()) {
        let k1 = common_part(&a, &b);
        let k2 = common_part(&b, &a);
        prop_assert!((0.0..=1.0).contains(&k1));
        prop_assert!((k1 - k2).abs() < 1e-9);
        prop_assert!((common_part(&a, &a) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn coupled_draws_agree_on_the_common_branch(u in 0.0f64..1.0, v in 0.0f64..1.0, w in 0.0f64..1.0) {
        let a = LifetimeModel::gamma(2.0, 1.0).unwrap();
        let b = LifetimeModel::exponential(0.7).unwrap();
        let dec = decompose(&a, &b).unwrap();
        let (x, y, coupled) = couple_pair(&dec, u, v, w);
        prop_assert_eq!(coupled, u < dec.kappa());
        if coupled {
            prop_assert_eq!(x, y);
        }
        prop_assert!(x >= 0.0 && y >= 0.0);
    }

    #[test]
    fn series_closed_form_matches_summation(vk in 0.02f64..1.0) {
        let direct = series_direct(vk, 2).value;
        prop_assert!(((series_closed_form(vk) - direct) / direct).abs() < 1e-10);
    }

    #[test]
    fn attempt_moment_is_decreasing_in_success_probability(vk in 0.05f64..0.9, d in 0.01f64..0.1, ell in 2u32..5) {
        prop_assert!(attempt_moment((vk + d).min(1.0), ell) <= attempt_moment(vk, ell) * (1.0 + 1e-12));
    }
}
