use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use t3_core::field::families::{case_rng, random_band_limited};
use t3_core::field::{gradient, hessian, laplacian_flat, FlatNorm, GridSpec, OneFormField, ScalarField, TwoTensorField};
use t3_core::ledger::Ledger;
use t3_core::metric::{perturbation_family, sym, Geometry, MetricField, PerturbationKind, SYM_PAIRS};

fn grid(n: usize) -> GridSpec {
    GridSpec::new(n).unwrap()
}

fn family(delta: f64, kind: PerturbationKind, seed: u64) -> MetricField {
    perturbation_family(delta, kind, grid(16), seed).unwrap()
}

#[test]
fn inverse_is_accurate_for_all_families() {
    for kind in PerturbationKind::ALL {
        for delta in [1e-3, 0.05, 0.1] {
            let g = family(delta, kind, 7);
            assert!(g.product_defect(&g.inverse_field().unwrap()) < 1e-12);
        }
    }
}

#[test]
fn positive_definite_at_tenth() {
    for kind in PerturbationKind::ALL {
        for seed in 0..5 {
            let g = family(0.1, kind, seed);
            for idx in 0..g.grid().len() {
                let a = g.at(idx);
                assert!(a[0][0] > 0.0);
                assert!(a[0][0] * a[1][1] - a[0][1] * a[1][0] > 0.0);
                assert!(t3_core::metric::det3(&a) > 0.0);
            }
        }
    }
}

#[test]
fn determinant_within_ledger_bounds() {
    let ledger = Ledger::default();
    for kind in PerturbationKind::ALL {
        let g = family(0.05, kind, 3);
        let d0 = g.c0_distance();
        let lo = ledger.eval("C_det_lo", Some(d0)).unwrap();
        let hi = ledger.eval("C_det_hi", Some(d0)).unwrap();
        let det = g.det_field();
        assert!(det.min() >= lo.lo() && det.max() <= hi.hi(), "{kind:?}");
    }
}

#[test]
fn inverse_distance_within_derived_bound() {
    for kind in PerturbationKind::ALL {
        let g = family(0.1, kind, 1);
        let d0 = g.c0_distance();
        let inv = g.inverse_field().unwrap().c0_distance();
        assert!(inv <= 6.0 * d0, "{kind:?}: {inv} vs {d0}");
    }
}

#[test]
fn christoffel_linear_bound_and_symmetry() {
    for kind in PerturbationKind::ALL {
        let g = family(0.05, kind, 2);
        let d = g.measured_c1_distance();
        let geo = Geometry::new(&g).unwrap();
        let max = geo.christoffel().max_abs();
        assert!(max <= 1.5 * (1.0 + 2.0 * d) * 3.0 * d, "{kind:?}: {max}");
        assert!(max > 0.0);
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(geo.christoffel().raw(k, i, j), geo.christoffel().raw(k, j, i));
                }
            }
        }
    }
}

/// g(x) = I + a·P(x) with closed-form entries, for a finite-difference oracle.
fn analytic_metric(x: [f64; 3]) -> [[f64; 3]; 3] {
    let s = |k: [f64; 3], ph: f64| (2.0 * PI * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]) + ph).sin();
    let a = 0.02;
    let p11 = s([1.0, 0.0, 0.0], 0.1);
    let p22 = s([0.0, 1.0, 1.0], 0.7);
    let p33 = s([2.0, -1.0, 0.0], 1.3);
    let p12 = s([1.0, 1.0, 0.0], 0.2);
    let p13 = s([0.0, 0.0, 2.0], 2.1);
    let p23 = s([1.0, 0.0, -2.0], -0.4);
    [
        [1.0 + a * p11, a * p12, a * p13],
        [a * p12, 1.0 + a * p22, a * p23],
        [a * p13, a * p23, 1.0 + a * p33],
    ]
}

#[test]
fn christoffel_matches_finite_difference_oracle() {
    let g0 = grid(16);
    let comps: [Vec<f64>; 6] = std::array::from_fn(|s| {
        let (i, j) = SYM_PAIRS[s];
        (0..g0.len()).map(|idx| analytic_metric(g0.point(idx))[i][j]).collect()
    });
    let g = MetricField::new(g0, comps, 0.0).unwrap();
    let geo = Geometry::new(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let h = 1e-4;
    for _ in 0..10 {
        let idx = rng.gen_range(0..g0.len());
        let x = g0.point(idx);
        let dg = |a: usize| {
            let (mut xp, mut xm, mut xp2, mut xm2) = (x, x, x, x);
            xp[a] += h;
            xm[a] -= h;
            xp2[a] += 2.0 * h;
            xm2[a] -= 2.0 * h;
            let (fp, fm, fp2, fm2) = (analytic_metric(xp), analytic_metric(xm), analytic_metric(xp2), analytic_metric(xm2));
            let mut d = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    d[i][j] = (-fp2[i][j] + 8.0 * fp[i][j] - 8.0 * fm[i][j] + fm2[i][j]) / (12.0 * h);
                }
            }
            d
        };
        let d = [dg(0), dg(1), dg(2)];
        let ginv = t3_core::metric::invert3(&analytic_metric(x)).unwrap();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let oracle: f64 =
                        (0..3).map(|n| 0.5 * ginv[k][n] * (d[j][n][i] + d[i][n][j] - d[n][i][j])).sum();
                    let got = geo.christoffel().raw(k, i, j)[idx];
                    assert!((got - oracle).abs() < 1e-9, "Γ^{k}_{i}{j}: {got} vs {oracle}");
                }
            }
        }
    }
}

#[test]
fn distance_invariant_under_axis_relabeling() {
    let g = family(0.05, PerturbationKind::RandomSeeded, 4);
    let gs = g.grid();
    let n = gs.n();
    // swap x₁ ↔ x₃ in both the coordinates and the matrix indices
    let perm = [2usize, 1, 0];
    let comps: [Vec<f64>; 6] = std::array::from_fn(|s| {
        let (i, j) = SYM_PAIRS[s];
        (0..gs.len())
            .map(|idx| {
                let c = [idx / (n * n), (idx / n) % n, idx % n];
                g.deviation(perm[i], perm[j])[gs.index(c[2], c[1], c[0])]
            })
            .collect()
    });
    let swapped = MetricField::from_deviation(gs, comps, 0.05).unwrap();
    let (a, b) = (g.measured_c1_distance(), swapped.measured_c1_distance());
    assert!((a - b).abs() < 1e-15, "{a} vs {b}");
}

#[test]
fn laplace_beltrami_self_adjoint() {
    for kind in PerturbationKind::ALL {
        let g = family(0.05, kind, 6);
        let geo = Geometry::new(&g).unwrap();
        for i in 0..5 {
            let u = random_band_limited(g.grid(), &mut case_rng(40, 2 * i), 4, false);
            let v = random_band_limited(g.grid(), &mut case_rng(40, 2 * i + 1), 4, false);
            let a = geo.inner_product(&geo.laplace_beltrami(&u), &v);
            let b = geo.inner_product(&u, &geo.laplace_beltrami(&v));
            let scale = geo.lp_norm(&u, 2.0).unwrap() * geo.lp_norm(&v, 2.0).unwrap();
            assert!((a - b).abs() <= 1e-6 * scale, "{kind:?}: {a} vs {b}");
        }
    }
}

#[test]
fn codifferential_integrates_to_zero() {
    for kind in PerturbationKind::ALL {
        let g = family(0.05, kind, 8);
        let geo = Geometry::new(&g).unwrap();
        for i in 0..5 {
            let comps: [ScalarField; 3] =
                std::array::from_fn(|j| random_band_limited(g.grid(), &mut case_rng(50 + i, j as u64), 4, false));
            let omega = OneFormField::new(comps);
            let one = ScalarField::constant(g.grid(), 1.0);
            let integral = geo.inner_product(&geo.codifferential(&omega), &one);
            assert!(integral.abs() < 1e-8, "{kind:?}: {integral}");
        }
        let dx1 = geo.inner_product(&geo.codifferential(&OneFormField::coordinate(g.grid(), 0)), &ScalarField::constant(g.grid(), 1.0));
        assert!(dx1.abs() < 1e-8);
    }
}

#[test]
fn flat_laplace_beltrami_agrees_with_flat_laplacian() {
    let g = perturbation_family(0.0, PerturbationKind::Conformal, grid(16), 0).unwrap();
    let geo = Geometry::new(&g).unwrap();
    let u = random_band_limited(g.grid(), &mut case_rng(3, 3), 4, false);
    let d = geo.laplace_beltrami(&u).sub(&laplacian_flat(&u)).max_abs();
    assert!(d < 1e-12);
    assert_eq!(geo.sobolev_norm(&u, 2, 4.0).unwrap(), t3_core::field::sobolev_norm_flat(&u, 2, 4.0).unwrap());
}

/// δ' for the pointwise comparison lemmas, which assume |g^{ij} − δ_ij| ≤ δ'.
fn sandwich_delta(g: &MetricField) -> f64 {
    1.05 * g.c0_distance().max(g.inverse_field().unwrap().c0_distance())
}

#[test]
fn covector_and_two_tensor_sandwiches() {
    let ledger = Ledger::default();
    for kind in PerturbationKind::ALL {
        let g = family(0.05, kind, 9);
        let geo = Geometry::new(&g).unwrap();
        let d = sandwich_delta(&g);
        let (clo, chi) = (ledger.eval("C_cov_lo", Some(d)).unwrap(), ledger.eval("C_cov_hi", Some(d)).unwrap());
        let (tlo, thi) = (ledger.eval("C_2tensor_lo", Some(d)).unwrap(), ledger.eval("C_2tensor_hi", Some(d)).unwrap());
        for i in 0..4 {
            let u = random_band_limited(g.grid(), &mut case_rng(60, i), 4, false);
            let du = gradient(&u);
            let (ng, nf) = (geo.norm_one_form(&du), du.pointwise_norm());
            for (a, b) in ng.values().iter().zip(&nf) {
                assert!(*a >= clo.lo() * b && *a <= chi.hi() * b);
            }
            let comps: Vec<ScalarField> =
                (0..9).map(|c| random_band_limited(g.grid(), &mut case_rng(70 + i, c), 4, false)).collect();
            for t in [hessian(&u), TwoTensorField::new(comps)] {
                let (ng, nf) = (geo.norm_two_tensor(&t), t.pointwise_norm());
                for (a, b) in ng.values().iter().zip(&nf) {
                    assert!(*a >= tlo.lo() * b && *a <= thi.hi() * b);
                }
            }
        }
    }
}

#[test]
fn flat_metric_unit_covector() {
    let geo = Geometry::new(&MetricField::flat(grid(8))).unwrap();
    for axis in 0..3 {
        let n = geo.norm_one_form(&OneFormField::coordinate(grid(8), axis));
        assert!(n.values().iter().all(|&v| v == 1.0));
    }
    assert_eq!(sym(2, 0), sym(0, 2));
}

#[test]
fn metric_snapshot_has_six_components() {
    let dir = tempfile::tempdir().unwrap();
    let g = perturbation_family(0.01, PerturbationKind::Offdiag, grid(8), 1).unwrap();
    let stem = dir.path().join("g");
    g.write_snapshot(&stem, Some(1)).unwrap();
    let (h, comps) = t3_core::field::snapshot::read_snapshot(&stem).unwrap();
    assert_eq!((h.components, h.kind.as_str()), (6, "metric"));
    assert_eq!(comps[1], g.deviation(0, 1));
    assert_eq!(comps[0], g.component(0, 0).into_values());
}

#[test]
fn tiny_perturbations_keep_their_measured_size() {
    for kind in PerturbationKind::ALL {
        let g = perturbation_family(1e-15, kind, grid(32), 0).unwrap();
        let m = g.measured_c1_distance();
        assert!((0.5e-15..=1e-15).contains(&m), "{kind:?}: {m}");
        assert!(g.effective_delta().unwrap() <= 1.05e-15);
    }
}
