mod support;

use optrisk::risk::{self, RiskAdjustment};
use optrisk::{barrier, european, MarketParams, OptionKind, OptionSpec};
use proptest::prelude::*;

fn market() -> impl Strategy<Value = MarketParams> {
    (0.01..0.1f64, 0.1..0.5f64, 0.5..2.0f64).prop_map(|(r, sigma, s0)| MarketParams { r, sigma, s0 })
}

fn kind() -> impl Strategy<Value = OptionKind> {
    prop_oneof![Just(OptionKind::Call), Just(OptionKind::Put)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moments_match_quadrature(m in market(), kind in kind(), k in 0.5..2.0f64, t in 0.1..2.0f64) {
        let spec = OptionSpec::european(kind, k, t);
        for n in 1..=3u32 {
            let exact = european::nth_moment(&m, &spec, n).unwrap();
            let quad = support::european_moment(&m, kind, k, t, n as i32);
            prop_assert!((exact - quad).abs() < 1e-8, "n = {n}: {exact} vs {quad}");
        }
        let pew = european::pew(&m, &spec).unwrap();
        let paying = support::european_moment(&m, kind, k, t, 0);
        prop_assert!((pew - (1.0 - paying)).abs() < 1e-10);
    }

    #[test]
    fn barrier_moments_match_quadrature(
        m in market(),
        k in 0.6..2.0f64,
        t in 0.1..2.0f64,
        frac in 0.2..0.95f64,
    ) {
        let b = frac * m.s0.min(k);
        let p = barrier::dao_put_profile(&m, k, t, b).unwrap();
        prop_assert!((p.mean - support::dao_moment(&m, k, t, b, 1)).abs() < 1e-8);
        prop_assert!((p.second_moment - support::dao_moment(&m, k, t, b, 2)).abs() < 1e-8);
        prop_assert!((p.pew - (1.0 - support::dao_paying_probability(&m, k, t, b))).abs() < 1e-8);
    }

    #[test]
    fn barrier_never_exceeds_vanilla(m in market(), k in 0.6..2.0f64, t in 0.1..2.0f64, frac in 0.2..0.95f64) {
        let b = frac * m.s0.min(k);
        let dao = barrier::dao_put_profile(&m, k, t, b).unwrap();
        let vanilla = barrier::vanilla_put_profile(&m, k, t).unwrap();
        prop_assert!(dao.mean <= vanilla.mean + 1e-14);
        prop_assert!(dao.pew >= vanilla.pew - 1e-14);
        prop_assert!(dao.variance >= 0.0);
    }

    #[test]
    fn profile_is_coherent(m in market(), kind in kind(), k in 0.5..2.0f64, t in 0.1..2.0f64) {
        let p = european::risk_profile(&m, &OptionSpec::european(kind, k, t)).unwrap();
        prop_assert!(p.mean >= 0.0 && p.variance >= 0.0);
        prop_assert!((0.0..=1.0).contains(&p.pew));
        prop_assert!((p.sd * p.sd - p.variance).abs() <= 1e-15 * p.second_moment.max(1e-300));
        prop_assert!(p.second_moment >= p.mean * p.mean * (1.0 - 1e-12));
    }

    #[test]
    fn effective_vol_round_trips(m in market(), kind in kind(), k in 0.7..1.4f64, t in 0.1..2.0f64, sigma in 0.05..1.0f64) {
        let spec = OptionSpec::european(kind, k, t);
        let price = european::bs_price(&m, &spec, sigma).unwrap();
        // too little time value to pin the volatility down
        prop_assume!(european::vega(&m, &spec, sigma).unwrap() > 1e-4);
        let vol = risk::effective_volatility(&m, &spec, price).unwrap();
        prop_assert!((vol - sigma).abs() < 1e-8, "{vol} vs {sigma}");
    }

    #[test]
    fn adjustment_moves_vol_against_q(m in market(), k in 0.8..1.25f64, t in 0.25..2.0f64, q in 0.001..0.05f64) {
        for (sign, kind) in [(1.0, OptionKind::Put), (-1.0, OptionKind::Call)] {
            let curve = risk::smile_curve(&m, t, kind, RiskAdjustment::new(sign * q).unwrap(), &[k]).unwrap();
            if let Some(v) = curve[0].effective_vol {
                prop_assert!((v - m.sigma) * sign < 0.0, "q = {}: {v}", sign * q);
            }
        }
    }
}
