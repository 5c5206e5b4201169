//! Outward rounding checked against exact rational arithmetic.

use num_rational::BigRational;
use num_traits::{pow, One, Zero};
use proptest::prelude::*;
use t3_core::interval::{ratio, IntervalValue};

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn contains(v: IntervalValue, x: &BigRational) -> bool {
    q(v.lo()) <= *x && *x <= q(v.hi())
}

fn value() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6f64,
        -1.0..1.0f64,
        (1e-20..1e-10f64),
        (1.0..64.0f64).prop_map(|x| x.round()),
    ]
}

fn positive() -> impl Strategy<Value = f64> {
    prop_oneof![1e-8..1e8f64, (1.0..100.0f64).prop_map(|x| x.round())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn add_sub_mul_enclose(a in value(), b in value()) {
        let (ia, ib) = (IntervalValue::point(a), IntervalValue::point(b));
        prop_assert!(contains(ia + ib, &(q(a) + q(b))));
        prop_assert!(contains(ia - ib, &(q(a) - q(b))));
        prop_assert!(contains(ia * ib, &(q(a) * q(b))));
    }

    #[test]
    fn div_encloses(a in value(), b in value()) {
        prop_assume!(b != 0.0);
        let r = IntervalValue::point(a).try_div(IntervalValue::point(b)).unwrap();
        prop_assert!(contains(r, &(q(a) / q(b))));
    }

    #[test]
    fn wide_operands_enclose_endpoints(a in value(), w in 0.0..10.0f64, b in value(), v in 0.0..10.0f64) {
        let ia = IntervalValue::new(a, a + w).unwrap();
        let ib = IntervalValue::new(b, b + v).unwrap();
        for x in [ia.lo(), ia.hi(), ia.mid()] {
            for y in [ib.lo(), ib.hi(), ib.mid()] {
                prop_assert!(contains(ia * ib, &(q(x) * q(y))));
                prop_assert!(contains(ia + ib, &(q(x) + q(y))));
                prop_assert!(contains(ia.max(ib), &q(x.max(y))));
            }
        }
    }

    #[test]
    fn sqrt_encloses(x in positive()) {
        let r = IntervalValue::point(x).sqrt().unwrap();
        let s = q(x);
        prop_assert!(q(r.lo()) * q(r.lo()) <= s);
        prop_assert!(s <= q(r.hi()) * q(r.hi()));
    }

    #[test]
    fn rational_power_encloses(x in positive(), p in -6i64..7, den in 1i64..7) {
        prop_assume!(p != 0);
        let r = IntervalValue::point(x).pow_ratio(ratio(p, den)).unwrap();
        // x^(p/den) ∈ [lo, hi]  ⟺  lo^den ≤ x^p ≤ hi^den for the positive branch
        let xp = if p > 0 { pow(q(x), p as usize) } else { BigRational::one() / pow(q(x), (-p) as usize) };
        prop_assert!(pow(q(r.lo()), den as usize) <= xp, "lower bound too high: {r:?}");
        prop_assert!(xp <= pow(q(r.hi()), den as usize), "upper bound too low: {r:?}");
        prop_assert!(r.width() <= 1e-13 * r.hi().abs().max(1e-300));
    }

    #[test]
    fn representable_results_are_points(a in -1000i64..1000, b in -1000i64..1000) {
        let (ia, ib) = (IntervalValue::from_integer(a), IntervalValue::from_integer(b));
        prop_assert!((ia + ib).is_point());
        prop_assert!((ia * ib).is_point());
        let sq = IntervalValue::from_integer(a * a).sqrt().unwrap();
        prop_assert_eq!(sq, IntervalValue::from_integer(a.abs()));
    }
}

#[test]
fn zero_stays_exact() {
    let z = IntervalValue::ZERO;
    assert_eq!(IntervalValue::point(9.0) * z.square(), z);
    assert!(contains(z, &BigRational::zero()));
    assert_eq!(IntervalValue::ONE.pow_ratio(ratio(1, 8)).unwrap(), IntervalValue::ONE);
}
