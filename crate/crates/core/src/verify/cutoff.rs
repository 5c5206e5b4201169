//! Product-smootherstep cutoff χ(x) = Π φ(x_i), φ(t) = S(t+1)·S(2−t), on
//! Q̃ = [−1, 2]³. χ ≡ 1 on Q = [0, 1]³ and vanishes on ∂Q̃ with its first two
//! derivatives continuous.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::interval::IntervalValue as I;
use crate::ledger::Ledger;

use super::VerificationRecord;

/// S(t) = 6t⁵ − 15t⁴ + 10t³ on [0, 1], clamped outside.
pub fn smootherstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

/// S′(t) = 30t²(t − 1)².
pub fn smootherstep_d1(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (t - 1.0) * (t - 1.0)
}

/// S″(t) = 60t(2t − 1)(t − 1).
pub fn smootherstep_d2(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    60.0 * t * (2.0 * t - 1.0) * (t - 1.0)
}

/// The 1-D factor φ and its first two derivatives.
pub fn profile(t: f64) -> [f64; 3] {
    let (a, b) = (t + 1.0, 2.0 - t);
    let (sa, sb) = (smootherstep(a), smootherstep(b));
    let (da, db) = (smootherstep_d1(a), smootherstep_d1(b));
    let (dda, ddb) = (smootherstep_d2(a), smootherstep_d2(b));
    [sa * sb, da * sb - sa * db, dda * sb - 2.0 * da * db + sa * ddb]
}

/// χ, ∇χ and ∇²χ at x.
pub fn cutoff(x: [f64; 3]) -> (f64, [f64; 3], [[f64; 3]; 3]) {
    let p = x.map(profile);
    let val = p[0][0] * p[1][0] * p[2][0];
    let mut grad = [0.0; 3];
    let mut hess = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            // product over axes with derivative orders (i, j) applied
            let mut prod = 1.0;
            for (a, pa) in p.iter().enumerate() {
                let order = (a == i) as usize + (a == j) as usize;
                prod *= pa[order];
            }
            hess[i][j] = prod;
        }
        grad[i] = (0..3).map(|a| p[a][(a == i) as usize]).product();
    }
    (val, grad, hess)
}

#[derive(Clone, Debug, Serialize)]
pub struct CutoffReport {
    pub sample_n: usize,
    /// sampled max of |S′| on [0, 1]
    pub max_profile_derivative: f64,
    pub max_partial_ii: f64,
    pub max_partial_i: f64,
    pub max_partial_ij: f64,
    pub max_laplacian: f64,
    pub max_gradient: f64,
    pub max_hessian: f64,
    pub records: Vec<VerificationRecord>,
}

#[derive(Clone, Copy, Default)]
struct Maxima {
    ii: f64,
    i: f64,
    ij: f64,
    lap: f64,
    grad: f64,
    hess: f64,
}

impl Maxima {
    fn join(self, o: Self) -> Self {
        Self {
            ii: self.ii.max(o.ii),
            i: self.i.max(o.i),
            ij: self.ij.max(o.ij),
            lap: self.lap.max(o.lap),
            grad: self.grad.max(o.grad),
            hess: self.hess.max(o.hess),
        }
    }
}

/// Samples χ on `sample_n` equispaced points per axis of Q̃ (endpoints
/// included) and compares derivative maxima with the ledger's b₁, b₂, b₃ and
/// their aggregates. Grid maxima are lower bounds of the true suprema.
pub fn verify_cutoff_bounds(ledger: &Ledger, sample_n: usize) -> Result<CutoffReport> {
    if sample_n < 300 {
        return Err(crate::Error::Domain(format!("cutoff check needs at least 300 samples per axis, got {sample_n}")));
    }
    let h = 3.0 / (sample_n - 1) as f64;
    let pts: Vec<f64> = (0..sample_n).map(|k| -1.0 + k as f64 * h).collect();
    let p: Vec<[f64; 3]> = pts.iter().map(|&t| profile(t)).collect();
    let max_profile_derivative = pts.iter().map(|&t| smootherstep_d1(t + 1.0).abs()).fold(0.0, f64::max);

    let m = p
        .par_iter()
        .map(|pa| {
            let mut acc = Maxima::default();
            for pb in &p {
                for pc in &p {
                    let q = [pa, pb, pc];
                    let g: [f64; 3] = std::array::from_fn(|i| (0..3).map(|a| q[a][(a == i) as usize]).product());
                    let mut hess = [[0.0; 3]; 3];
                    for (i, row) in hess.iter_mut().enumerate() {
                        for (j, v) in row.iter_mut().enumerate() {
                            *v = (0..3).map(|a| q[a][(a == i) as usize + (a == j) as usize]).product();
                        }
                    }
                    let fro = hess.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
                    let off = [hess[0][1], hess[0][2], hess[1][2]].map(f64::abs);
                    acc = acc.join(Maxima {
                        ii: (0..3).map(|i| hess[i][i].abs()).fold(0.0, f64::max),
                        i: g.iter().map(|v| v.abs()).fold(0.0, f64::max),
                        ij: off.into_iter().fold(0.0, f64::max),
                        lap: (hess[0][0] + hess[1][1] + hess[2][2]).abs(),
                        grad: g.iter().map(|v| v * v).sum::<f64>().sqrt(),
                        hess: fro,
                    });
                }
            }
            acc
        })
        .reduce(Maxima::default, Maxima::join);

    let case = format!("sample-{sample_n}");
    let rec = |id: &str, lhs: f64, bound: I| VerificationRecord::new(id, &case, lhs, bound.hi(), sample_n, 0);
    let records = vec![
        rec("cutoff_partial_ii", m.ii, ledger.eval("b1", None)?),
        rec("cutoff_partial_i", m.i, ledger.eval("b2", None)?),
        rec("cutoff_partial_ij", m.ij, ledger.eval("b3", None)?),
        rec("cutoff_laplacian", m.lap, ledger.eval("C_Laplacian_chi", None)?),
        rec("cutoff_gradient", m.grad, ledger.eval("C_D_chi", None)?),
        rec("cutoff_hessian", m.hess, ledger.eval("C_D2_chi", None)?),
    ];
    Ok(CutoffReport {
        sample_n,
        max_profile_derivative,
        max_partial_ii: m.ii,
        max_partial_i: m.i,
        max_partial_ij: m.ij,
        max_laplacian: m.lap,
        max_gradient: m.grad,
        max_hessian: m.hess,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_on_q_zero_on_boundary() {
        for x in [[0.0, 0.5, 1.0], [0.3, 0.7, 0.9], [1.0, 1.0, 0.0]] {
            let (v, g, h) = cutoff(x);
            assert_eq!(v, 1.0);
            assert!(g.iter().all(|&d| d == 0.0));
            assert!(h.iter().flatten().all(|&d| d == 0.0));
        }
        for x in [[-1.0, 0.5, 0.5], [0.2, 2.0, 0.1], [1.5, -0.3, -1.0]] {
            let (v, g, _) = cutoff(x);
            assert_eq!(v, 0.0);
            assert!(g.iter().all(|&d| d == 0.0));
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let x = [-0.37, 1.42, 0.81];
        let (_, g, hs) = cutoff(x);
        let e = 1e-6;
        for i in 0..3 {
            let (mut xp, mut xm) = (x, x);
            xp[i] += e;
            xm[i] -= e;
            let ((vp, gp, _), (vm, gm, _)) = (cutoff(xp), cutoff(xm));
            assert!(((vp - vm) / (2.0 * e) - g[i]).abs() < 1e-8);
            for j in 0..3 {
                let fd = (gp[j] - gm[j]) / (2.0 * e);
                assert!((fd - hs[i][j]).abs() < 1e-7, "{i}{j}: {fd} vs {}", hs[i][j]);
            }
        }
    }

    #[test]
    fn second_derivative_continuous_at_joins() {
        for t in [-1.0, 0.0, 1.0, 2.0] {
            let (l, r) = (profile(t - 1e-9), profile(t + 1e-9));
            assert!((l[2] - r[2]).abs() < 1e-6, "{t}");
        }
    }
}
