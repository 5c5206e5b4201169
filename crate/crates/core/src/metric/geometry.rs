//! Christoffel symbols and the metric-dependent operators and norms built on them.

use crate::error::Result;
use crate::field::{gradient, hessian, weighted_lp, GridSpec, OneFormField, ScalarField, TwoTensorField};

use super::{derivatives, sym, MetricField, SYM_PAIRS};

/// Γ^k_ij, symmetric in (i, j) by storage: slot 6k + sym(i, j).
#[derive(Clone, Debug, PartialEq)]
pub struct ChristoffelField {
    grid: GridSpec,
    gamma: Vec<Vec<f64>>,
}

impl ChristoffelField {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn raw(&self, k: usize, i: usize, j: usize) -> &[f64] {
        &self.gamma[6 * k + sym(i, j)]
    }

    pub fn component(&self, k: usize, i: usize, j: usize) -> ScalarField {
        ScalarField::new(self.grid, self.raw(k, i, j).to_vec()).expect("grid-sized")
    }

    /// Grid max of |Γ^k_ij| over all indices.
    pub fn max_abs(&self) -> f64 {
        self.gamma.iter().flat_map(|c| c.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Everything pointwise about g that the operators need, computed once.
#[derive(Clone, Debug)]
pub struct Geometry {
    metric: MetricField,
    inverse: MetricField,
    /// full entries g^{ij} in symmetric storage
    ginv: [Vec<f64>; 6],
    det: Vec<f64>,
    sqrt_det: Vec<f64>,
    christoffel: ChristoffelField,
    /// Σ_ij g^{ij} Γ^k_ij for each k.
    contracted: [Vec<f64>; 3],
}

impl Geometry {
    pub fn new(g: &MetricField) -> Result<Self> {
        let grid = g.grid();
        let n = grid.len();
        let inverse = g.inverse_field()?;
        let ginv: [Vec<f64>; 6] = std::array::from_fn(|s| {
            let (i, j) = SYM_PAIRS[s];
            inverse.component(i, j).into_values()
        });
        let det = g.det_field().into_values();
        let sqrt_det = det.iter().map(|d| d.sqrt()).collect();
        // dg[s][a] = ∂_a g_s
        let dg: Vec<[Vec<f64>; 3]> = (0..6).map(|s| derivatives(grid, &g.h[s])).collect();
        let mut gamma = vec![vec![0.0; n]; 18];
        for k in 0..3 {
            for (s, &(i, j)) in SYM_PAIRS.iter().enumerate() {
                let out = &mut gamma[6 * k + s];
                for m in 0..3 {
                    let gkm = &ginv[sym(k, m)];
                    let (a, b, c) = (&dg[sym(m, i)][j], &dg[sym(m, j)][i], &dg[sym(i, j)][m]);
                    for x in 0..n {
                        out[x] += 0.5 * gkm[x] * (a[x] + b[x] - c[x]);
                    }
                }
            }
        }
        let christoffel = ChristoffelField { grid, gamma };
        let contracted = std::array::from_fn(|k| {
            let mut acc = vec![0.0; n];
            for i in 0..3 {
                for j in 0..3 {
                    let (gij, gam) = (&ginv[sym(i, j)], christoffel.raw(k, i, j));
                    for x in 0..n {
                        acc[x] += gij[x] * gam[x];
                    }
                }
            }
            acc
        });
        Ok(Self {
            metric: g.clone(),
            inverse,
            ginv,
            det,
            sqrt_det,
            christoffel,
            contracted,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.metric.grid()
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn inverse(&self) -> &MetricField {
        &self.inverse
    }

    pub fn det(&self) -> &[f64] {
        &self.det
    }

    pub fn sqrt_det(&self) -> &[f64] {
        &self.sqrt_det
    }

    pub fn christoffel(&self) -> &ChristoffelField {
        &self.christoffel
    }

    /// Σ_ij g^{ij} Γ^k_ij, which is also d*_g dx_k.
    pub fn contracted_christoffel(&self, k: usize) -> ScalarField {
        ScalarField::new(self.grid(), self.contracted[k].clone()).expect("grid-sized")
    }

    /// vol_g(T³) = ∫ √det g.
    pub fn volume(&self) -> f64 {
        self.sqrt_det.iter().sum::<f64>() / self.sqrt_det.len() as f64
    }

    /// ∫ u v √det g.
    pub fn inner_product(&self, u: &ScalarField, v: &ScalarField) -> f64 {
        let s: f64 = u.values().iter().zip(v.values()).zip(&self.sqrt_det).map(|((a, b), w)| a * b * w).sum();
        s / self.sqrt_det.len() as f64
    }

    /// u minus its vol_g-average.
    pub fn mean_zero_project(&self, u: &ScalarField) -> ScalarField {
        let one = ScalarField::constant(self.grid(), 1.0);
        let m = self.inner_product(u, &one) / self.volume();
        u.map(|v| v - m)
    }

    /// Δᵍu = Σ g^{ij}(∂_i∂_j u − Σ_k Γ^k_ij ∂_k u).
    pub fn laplace_beltrami(&self, u: &ScalarField) -> ScalarField {
        let h = hessian(u);
        let du = gradient(u);
        let n = self.grid().len();
        let mut out = vec![0.0; n];
        for i in 0..3 {
            for j in 0..3 {
                let (ginv, hij) = (&self.ginv[sym(i, j)], h.raw(i, j));
                for x in 0..n {
                    out[x] += ginv[x] * hij[x];
                }
            }
        }
        for k in 0..3 {
            let (c, d) = (&self.contracted[k], du.raw(k));
            for x in 0..n {
                out[x] -= c[x] * d[x];
            }
        }
        ScalarField::new(self.grid(), out).expect("grid-sized")
    }

    /// d*_g ω = −Σ g^{ij}∂_iω_j + Σ g^{ij}Γ^k_ij ω_k.
    pub fn codifferential(&self, omega: &OneFormField) -> ScalarField {
        let n = self.grid().len();
        let mut out = vec![0.0; n];
        for j in 0..3 {
            let d = derivatives(self.grid(), omega.raw(j));
            for (i, di) in d.iter().enumerate() {
                let ginv = &self.ginv[sym(i, j)];
                for x in 0..n {
                    out[x] -= ginv[x] * di[x];
                }
            }
        }
        for k in 0..3 {
            let (c, w) = (&self.contracted[k], omega.raw(k));
            for x in 0..n {
                out[x] += c[x] * w[x];
            }
        }
        ScalarField::new(self.grid(), out).expect("grid-sized")
    }

    /// ∇ᵍdu with components ∂_i∂_j u − Σ_k Γ^k_ij ∂_k u.
    pub fn covariant_hessian(&self, u: &ScalarField) -> TwoTensorField {
        let h = hessian(u);
        let du = gradient(u);
        let n = self.grid().len();
        let comps = (0..9)
            .map(|c| {
                let (i, j) = (c / 3, c % 3);
                let mut v = h.raw(i, j).to_vec();
                for k in 0..3 {
                    let (gam, d) = (self.christoffel.raw(k, i, j), du.raw(k));
                    for x in 0..n {
                        v[x] -= gam[x] * d[x];
                    }
                }
                ScalarField::new(self.grid(), v).expect("grid-sized")
            })
            .collect();
        TwoTensorField::new(comps)
    }

    /// |ω|_g = (g^{ij} ω_i ω_j)^{1/2}.
    pub fn norm_one_form(&self, omega: &OneFormField) -> ScalarField {
        let values = (0..self.grid().len())
            .map(|x| {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += self.ginv[sym(i, j)][x] * omega.raw(i)[x] * omega.raw(j)[x];
                    }
                }
                s.max(0.0).sqrt()
            })
            .collect();
        ScalarField::new(self.grid(), values).expect("grid-sized")
    }

    /// |T|_g = (g^{ik} g^{jl} T_ij T_kl)^{1/2}.
    pub fn norm_two_tensor(&self, t: &TwoTensorField) -> ScalarField {
        let values = (0..self.grid().len())
            .map(|x| {
                let gi = self.inverse.at(x);
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        let tij = t.raw(i, j)[x];
                        for k in 0..3 {
                            for l in 0..3 {
                                s += gi[i][k] * gi[j][l] * tij * t.raw(k, l)[x];
                            }
                        }
                    }
                }
                s.max(0.0).sqrt()
            })
            .collect();
        ScalarField::new(self.grid(), values).expect("grid-sized")
    }

    /// (∫ |f|^p √det g)^{1/p} for pointwise values f.
    pub fn lp_norm(&self, f: &ScalarField, p: f64) -> Result<f64> {
        weighted_lp(f.values(), Some(&self.sqrt_det), p)
    }

    /// Σ_{i≤k} (∫ |∇ⁱu|_g^p √det g)^{1/p}, with ∇²u read as ∇ᵍdu.
    pub fn sobolev_norm(&self, u: &ScalarField, k: usize, p: f64) -> Result<f64> {
        if k > 2 {
            return Err(crate::Error::Domain(format!("Sobolev order {k} not supported")));
        }
        let mut total = self.lp_norm(u, p)?;
        if k >= 1 {
            total += self.lp_norm(&self.norm_one_form(&gradient(u)), p)?;
        }
        if k >= 2 {
            total += self.lp_norm(&self.norm_two_tensor(&self.covariant_hessian(u)), p)?;
        }
        Ok(total)
    }
}

pub fn christoffel_field(g: &MetricField) -> Result<ChristoffelField> {
    Ok(Geometry::new(g)?.christoffel)
}

pub fn laplace_beltrami(g: &MetricField, u: &ScalarField) -> Result<ScalarField> {
    Ok(Geometry::new(g)?.laplace_beltrami(u))
}

pub fn codifferential(g: &MetricField, omega: &OneFormField) -> Result<ScalarField> {
    Ok(Geometry::new(g)?.codifferential(omega))
}
