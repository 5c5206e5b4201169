use t3_core::interval::{ratio, IntervalValue};
use t3_core::ledger::formulas::{self as f, ChristoffelBound, InverseBound, OmegaReading};
use t3_core::ledger::{max_admissible_delta, Criterion, Ledger, LedgerConfig, LedgerRow, DEFAULT_EXPORT_DELTAS};
use t3_core::Error;

/// Reference values from an independent 50-digit evaluation.
const ORACLE: &[(&str, Option<f64>, f64)] = &[
    ("omega_3", None, 4.188_790_204_786_391),
    ("T1", None, 629.765_592_370_810_6),
    ("C_FStar_measure", None, 21.765_592_370_810_612),
    ("C_Marcinkiewicz_4_3", None, 7.667_317_250_955_27),
    ("C_Marcinkiewicz_3_2", None, 6.603_854_497_789_253_5),
    ("C_CalderonZygmund_3_4", None, 192.412_329_679_991_53),
    ("C_Poincare_Qtilde", None, 1.861_051_472_698_200_1),
    ("C_grad_hessian_3_4", None, 11_400.120_704_058_398),
    ("C_grad_hessian_3_2", None, 59.248_389_762_851_4),
    ("C_Sobolev_K32", None, 0.427_260_542_862_526_7),
    ("C_Sobolev_K32_ball", None, 0.678_233_835_204_478_8),
    ("b1", None, 5.773_502_691_896_257),
    ("b2", None, 27.846_096_908_265_274),
    ("b3", None, 53.205_080_756_887_73),
    ("C_Morrey", None, 1.817_237_323_459_350_4),
    ("C_Schauder", None, 166_134_972_002.930_73),
    ("C_flat_injectivity", None, 65_864_018_991_174.79),
    ("C_det_hi", Some(0.01), 1.030606),
    ("epsilon_one_form", Some(1e-15), 0.999_999_999_999_992_5),
    ("C_nonflat_injectivity", Some(1e-15), 1.241_034_064_804_018_1e14),
];

fn encloses(v: IntervalValue, x: f64) -> bool {
    // the oracle decimals carry 18 significant digits
    let slack = x.abs() * 1e-17;
    v.lo() <= x + slack && x - slack <= v.hi()
}

#[test]
fn ledger_matches_high_precision_oracle() {
    let l = Ledger::default();
    for &(name, delta, x) in ORACLE {
        let v = l.eval(name, delta).unwrap();
        assert!(encloses(v, x), "{name} at {delta:?}: {v} misses {x}");
    }
}

#[test]
fn literal_values() {
    let l = Ledger::default();
    assert_eq!(l.eval("C_Sobolev_cube", None).unwrap(), IntervalValue::point(13.25));
    assert_eq!(l.eval("C_CalderonZygmund_3_2", None).unwrap(), IntervalValue::ONE);
    let p = l.eval("C_Poincare_Qtilde", None).unwrap();
    assert!(p.width() < 1e-12);
    let cz = l.eval("C_CalderonZygmund_3_4", None).unwrap();
    assert!(cz.width() < 0.5);
    assert!(l.node("C_CalderonZygmund_3_4").unwrap().discrepancy(&cz));
    assert_eq!(f::t1_distribution_constant(1).unwrap(), IntervalValue::point(58.0));
    assert_eq!(f::c_calderon_zygmund(3, ratio(2, 1)).unwrap(), IntervalValue::ONE);
    assert_eq!(f::gamma_half(8).unwrap(), IntervalValue::point(6.0));
}

#[test]
fn morrey_selects_integral_branch() {
    let (a, b) = f::c_morrey_branches().unwrap();
    assert!(encloses(a, 0.699_001_081_474_785_7));
    assert!(a.certainly_lt(&b));
    assert_eq!(f::c_morrey().unwrap(), b);
}

#[test]
fn conjugate_symmetry_is_exact() {
    for (p, q) in [(ratio(4, 1), ratio(4, 3)), (ratio(3, 1), ratio(3, 2)), (ratio(5, 2), ratio(5, 3))] {
        assert_eq!(f::conjugate(p), q);
        for n in 1..=4 {
            assert_eq!(f::c_calderon_zygmund(n, p).unwrap(), f::c_calderon_zygmund(n, q).unwrap());
        }
    }
    assert!(f::c_calderon_zygmund(3, ratio(1, 1)).is_err());
}

#[test]
fn evaluation_is_deterministic() {
    let a = Ledger::default().rows(DEFAULT_EXPORT_DELTAS);
    let b = Ledger::default().rows(DEFAULT_EXPORT_DELTAS);
    assert_eq!(a, b);
}

#[test]
fn golden_table_is_frozen() {
    let frozen: Vec<LedgerRow> = serde_json::from_str(include_str!("golden/ledger.json")).unwrap();
    let now = Ledger::default().rows(DEFAULT_EXPORT_DELTAS);
    assert_eq!(frozen.len(), now.len(), "row count changed");
    for (a, b) in frozen.iter().zip(&now) {
        assert_eq!(a, b, "golden row for {} at {:?} changed", a.name, a.delta);
    }
}

fn sweep(hi: f64) -> Vec<f64> {
    (0..1000).map(|i| hi * i as f64 / 1000.0).collect()
}

/// f(b) cannot be certainly below f(a) for a < b.
fn non_decreasing(values: &[IntervalValue]) -> bool {
    values.windows(2).all(|w| !w[1].certainly_lt(&w[0]))
}

fn non_increasing(values: &[IntervalValue]) -> bool {
    values.windows(2).all(|w| !w[0].certainly_lt(&w[1]))
}

#[test]
fn monotone_in_delta() {
    let l = Ledger::default();
    let deltas = sweep(1.0 / 6.0);
    let series = |name: &str| -> Vec<IntervalValue> { deltas.iter().map(|&d| l.eval(name, Some(d)).unwrap()).collect() };
    for name in ["C_det_hi", "C_Christoffel", "C_Laplacian_comparison", "C_cov_hi"] {
        assert!(non_decreasing(&series(name)), "{name} decreases");
    }
    for name in ["C_det_lo", "C_cov_lo"] {
        assert!(non_increasing(&series(name)), "{name} increases");
    }
    let star = max_admissible_delta(&l, Criterion::Absorption).unwrap();
    let eps: Vec<_> = sweep(star.good).iter().map(|&d| l.eval("epsilon_one_form", Some(d)).unwrap()).collect();
    assert!(non_increasing(&eps));
    assert!(eps.iter().all(|e| e.lo() > 0.0));
}

#[test]
fn flat_collapse_for_every_variant() {
    for inverse in [InverseBound::Stated, InverseBound::Derived] {
        for christoffel in [ChristoffelBound::Quadratic, ChristoffelBound::Linear] {
            let l = Ledger::new(LedgerConfig { inverse, christoffel });
            for name in ["C_det_lo", "C_det_hi", "C_cov_lo", "C_cov_hi", "C_2tensor_lo", "C_2tensor_hi", "C_W1p_lo", "C_W1p_hi", "C_W2p_lo", "C_W2p_hi", "epsilon_one_form"] {
                assert_eq!(l.eval(name, Some(0.0)).unwrap(), IntervalValue::ONE, "{name}");
            }
            for name in ["C_inv", "C_Christoffel", "C_Laplacian_comparison"] {
                assert_eq!(l.eval(name, Some(0.0)).unwrap(), IntervalValue::ZERO, "{name}");
            }
        }
    }
}

#[test]
fn delta_star_reproduces_bound() {
    let l = Ledger::default();
    let abs = max_admissible_delta(&l, Criterion::Absorption).unwrap();
    assert!(abs.certified());
    assert!(abs.delta_star < 3e-14);
    assert!(encloses(abs.bracket(), 2.1309188133779423e-15));
    let c1 = l.eval("C_flat_injectivity", None).unwrap();
    let c14 = l.eval("C_Laplacian_comparison", Some(abs.delta_star * 0.999)).unwrap();
    assert!((c1 * c14).hi() < 1.0);
    let one = max_admissible_delta(&l, Criterion::OneForm).unwrap();
    assert!(one.delta_star < abs.delta_star);
}

#[test]
fn linear_christoffel_breaks_absorption_at_small_delta() {
    let l = Ledger::new(LedgerConfig { inverse: InverseBound::Stated, christoffel: ChristoffelBound::Linear });
    assert!(matches!(l.eval("epsilon_one_form", Some(1e-15)), Err(Error::AbsorptionFailure { .. })));
}

#[test]
fn sobolev_constant_positive() {
    for n in 2..=6u32 {
        for q2 in 2..(2 * n) {
            let q = ratio(q2 as i64, 2);
            if let Ok(k) = f::k_sobolev(n, q, OmegaReading::SphereSurface) {
                assert!(k.lo() > 0.0);
            }
        }
    }
}
