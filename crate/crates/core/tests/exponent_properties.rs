use proptest::prelude::*;
use qcc_core::exponents::{
    interpolation_indices, target_q, Exponent, Outcome, QcRegularity, Regime,
};
use qcc_core::Real;

fn rational(num: std::ops::RangeInclusive<i64>, den: i64) -> impl Strategy<Value = Real> {
    num.prop_map(move |k| Real::ratio(k, den))
}

prop_compose! {
    fn data()(n in 2u32..=4, s in rational(1..=23, 24), p in rational(9..=64, 8),
               a in rational(9..=40, 8), b in rational(2..=40, 8)) -> (u32, Real, Exponent, QcRegularity) {
        let reg = QcRegularity::new(n, a, b).unwrap();
        (n, s, Exponent::new(p).unwrap(), reg)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn gap_is_distance_over_jacobian_power((_n, s, p, reg) in data()) {
        if let Outcome::Accepted(t) = target_q(&s, &p, &reg).unwrap() {
            prop_assert_eq!(t.gap(&p), &t.distance / &t.c);
            prop_assert!(*t.q.inv() < Real::one());
            prop_assert!(t.q.inv() >= p.inv());
            let expected = if t.regime == Regime::Subcritical { &reg.b } else { &reg.a };
            prop_assert_eq!(&t.c, expected);
        }
    }

    #[test]
    fn larger_jacobian_powers_lose_less((n, s, p, reg) in data(), bump in rational(1..=16, 8)) {
        let better = QcRegularity::new(n, &reg.a + &bump, &reg.b + &bump).unwrap();
        if let (Outcome::Accepted(t0), Outcome::Accepted(t1)) =
            (target_q(&s, &p, &reg).unwrap(), target_q(&s, &p, &better).unwrap())
        {
            prop_assert!(t1.q.inv() <= t0.q.inv());
        }
    }

    #[test]
    fn interpolation_identities_hold_exactly((_n, s, p, reg) in data()) {
        if let Ok(ix) = interpolation_indices(&s, &p, &reg, None) {
            let (rp, rq) = ix.convex_residuals();
            prop_assert!(rp.is_zero() && rq.is_zero(), "{} {}", rp, rq);
            for r in ix.lambda_residuals(&reg) {
                prop_assert!(r.is_zero(), "{}", r);
            }
            prop_assert!(*ix.q0.inv() < Real::one() && *ix.q1.inv() < Real::one());
        }
    }

    #[test]
    fn float_inputs_track_exact_ones((_n, s, p, reg) in data()) {
        let exact = target_q(&s, &p, &reg).unwrap();
        let fs = Real::float(s.to_f64());
        let fp = Exponent::new(Real::float(p.to_f64())).unwrap();
        let freg = QcRegularity::new(reg.n, Real::float(reg.a.to_f64()), Real::float(reg.b.to_f64())).unwrap();
        let float = target_q(&fs, &fp, &freg).unwrap();
        if let (Outcome::Accepted(e), Outcome::Accepted(f)) = (exact, float) {
            if e.regime != Regime::Critical {
                prop_assert!((e.q.inv().to_f64() - f.q.inv().to_f64()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn critical_line_is_a_fixed_point() {
    for n in 2..=4u32 {
        for num in 1..=8 {
            let s = Real::ratio(num, 8);
            let p = Exponent::from_inv(&s / &Real::from(n as i64)).unwrap();
            if *p.inv() == Real::zero() {
                continue;
            }
            let reg = QcRegularity::new(n, Real::int(3), Real::int(2)).unwrap();
            if let Outcome::Accepted(t) = target_q(&s, &p, &reg).unwrap() {
                assert_eq!(t.regime, Regime::Critical);
                assert_eq!(t.q, p);
            }
        }
    }
}
