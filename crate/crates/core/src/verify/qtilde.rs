//! Compactly supported test functions u = χ·f on Q̃ = [−1, 2]³, with f a
//! seeded trigonometric polynomial, integrated by the midpoint rule.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use super::cutoff::cutoff;

/// c + Σ a·sin(2π k·x + φ), evaluated with its gradient.
#[derive(Clone, Debug)]
pub struct TrigPoly {
    pub constant: f64,
    pub modes: Vec<([f64; 3], f64, f64)>,
}

impl TrigPoly {
    pub fn one() -> Self {
        Self {
            constant: 1.0,
            modes: Vec::new(),
        }
    }

    pub fn random(rng: &mut impl Rng) -> Self {
        let modes = (0..3)
            .map(|_| {
                let k = [rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2)].map(|v: i64| v as f64);
                (k, rng.gen_range(0.2..1.0), rng.gen_range(0.0..2.0 * PI))
            })
            .collect();
        Self {
            constant: rng.gen_range(-1.0..1.0),
            modes,
        }
    }

    pub fn eval(&self, x: [f64; 3]) -> (f64, [f64; 3]) {
        let mut v = self.constant;
        let mut g = [0.0; 3];
        for (k, a, ph) in &self.modes {
            let arg = 2.0 * PI * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]) + ph;
            v += a * arg.sin();
            let c = a * arg.cos() * 2.0 * PI;
            for i in 0..3 {
                g[i] += c * k[i];
            }
        }
        (v, g)
    }
}

/// Midpoint-rule norms on Q̃ of u = χ·f and |Du|.
#[derive(Clone, Copy, Debug)]
pub struct QtildeNorms {
    pub u_l4: f64,
    pub u_l6: f64,
    pub du_l2: f64,
    pub du_l4: f64,
}

pub fn qtilde_norms(f: &TrigPoly, m: usize) -> QtildeNorms {
    let h = 3.0 / m as f64;
    let c = |i: usize| -1.0 + (i as f64 + 0.5) * h;
    let sums = (0..m)
        .into_par_iter()
        .map(|a| {
            let mut s = [0.0; 4];
            for b in 0..m {
                for cc in 0..m {
                    let x = [c(a), c(b), c(cc)];
                    let (chi, dchi, _) = cutoff(x);
                    let (fv, df) = f.eval(x);
                    let u = chi * fv;
                    let du2: f64 = (0..3).map(|i| (dchi[i] * fv + chi * df[i]).powi(2)).sum();
                    let u2 = u * u;
                    s[0] += u2 * u2;
                    s[1] += u2 * u2 * u2;
                    s[2] += du2;
                    s[3] += du2 * du2;
                }
            }
            s
        })
        .reduce(|| [0.0; 4], |a, b| std::array::from_fn(|i| a[i] + b[i]));
    let vol = h * h * h;
    QtildeNorms {
        u_l4: (sums[0] * vol).powf(0.25),
        u_l6: (sums[1] * vol).powf(1.0 / 6.0),
        du_l2: (sums[2] * vol).sqrt(),
        du_l4: (sums[3] * vol).powf(0.25),
    }
}
