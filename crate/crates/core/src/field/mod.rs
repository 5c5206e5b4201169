//! Periodic fields on the uniform N³ grid over [0,1)³ with the flat metric.

pub mod families;
pub mod snapshot;
mod spectral;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use spectral::{derivative_frequency, frequency, Spectrum};

/// Uniform grid with `n` points per axis; flat index (i₁·N + i₂)·N + i₃.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("need an even N >= 4, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        (i1 * self.n + i2) * self.n + i3
    }

    /// Coordinates of flat index `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        let h = self.spacing();
        [(idx / (n * n)) as f64 * h, ((idx / n) % n) as f64 * h, (idx % n) as f64 * h]
    }

    /// Sample `f` at every grid point.
    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> ScalarField {
        ScalarField {
            grid: *self,
            values: (0..self.len()).map(|i| f(self.point(i))).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_field(self)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Spectral interpolation onto a finer grid.
    pub fn upsample(&self, target: GridSpec) -> Self {
        self.spectrum().upsample(target).to_field()
    }
}

/// ω = Σ ω_j dx_j.
#[derive(Clone, Debug, PartialEq)]
pub struct OneFormField {
    grid: GridSpec,
    components: [Vec<f64>; 3],
}

impl OneFormField {
    pub fn new(components: [ScalarField; 3]) -> Self {
        let grid = components[0].grid;
        assert!(components.iter().all(|c| c.grid == grid), "components on different grids");
        let [a, b, c] = components;
        Self {
            grid,
            components: [a.values, b.values, c.values],
        }
    }

    /// The constant form dx_axis.
    pub fn coordinate(grid: GridSpec, axis: usize) -> Self {
        let mut c = [ScalarField::zeros(grid), ScalarField::zeros(grid), ScalarField::zeros(grid)];
        c[axis] = ScalarField::constant(grid, 1.0);
        Self::new(c)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn component(&self, j: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.components[j].clone(),
        }
    }

    pub fn raw(&self, j: usize) -> &[f64] {
        &self.components[j]
    }
}

/// T = Σ T_ij dx_i ⊗ dx_j, stored row-major in (i, j).
#[derive(Clone, Debug, PartialEq)]
pub struct TwoTensorField {
    grid: GridSpec,
    components: Vec<Vec<f64>>,
}

impl TwoTensorField {
    pub fn new(components: Vec<ScalarField>) -> Self {
        assert_eq!(components.len(), 9, "a 2-tensor has 9 components");
        let grid = components[0].grid;
        assert!(components.iter().all(|c| c.grid == grid), "components on different grids");
        Self {
            grid,
            components: components.into_iter().map(|c| c.values).collect(),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn component(&self, i: usize, j: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.components[3 * i + j].clone(),
        }
    }

    pub fn raw(&self, i: usize, j: usize) -> &[f64] {
        &self.components[3 * i + j]
    }
}

/// Fields with a flat pointwise norm: absolute value, Euclidean or Frobenius.
pub trait FlatNorm {
    fn grid(&self) -> GridSpec;
    fn pointwise_norm(&self) -> Vec<f64>;
}

impl FlatNorm for ScalarField {
    fn grid(&self) -> GridSpec {
        self.grid
    }
    fn pointwise_norm(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.abs()).collect()
    }
}

impl FlatNorm for OneFormField {
    fn grid(&self) -> GridSpec {
        self.grid
    }
    fn pointwise_norm(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| self.components.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .collect()
    }
}

impl FlatNorm for TwoTensorField {
    fn grid(&self) -> GridSpec {
        self.grid
    }
    fn pointwise_norm(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| self.components.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .collect()
    }
}

/// (mean of |v|^p · w)^{1/p} over grid samples, with optional weights.
pub fn weighted_lp(values: &[f64], weights: Option<&[f64]>, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("L^p norm needs 1 <= p < inf, got {p}")));
    }
    let even = p.fract() == 0.0 && p <= 16.0;
    let pow = |v: f64| if even { v.abs().powi(p as i32) } else { v.abs().powf(p) };
    let total: f64 = match weights {
        Some(w) => values.iter().zip(w).map(|(&v, &w)| pow(v) * w).sum(),
        None => values.iter().map(|&v| pow(v)).sum(),
    };
    Ok((total / values.len() as f64).powf(1.0 / p))
}

/// Uniform-grid quadrature of the flat L^p norm.
pub fn lp_norm<F: FlatNorm>(f: &F, p: f64) -> Result<f64> {
    weighted_lp(&f.pointwise_norm(), None, p)
}

/// Grid maximum of the pointwise norm; a lower bound for the true supremum.
pub fn max_norm<F: FlatNorm>(f: &F) -> f64 {
    f.pointwise_norm().into_iter().fold(0.0, f64::max)
}

pub fn spectral_derivative(u: &ScalarField, axis: usize) -> ScalarField {
    u.spectrum().derivative(axis).to_field()
}

pub fn gradient(u: &ScalarField) -> OneFormField {
    let s = u.spectrum();
    OneFormField::new([s.derivative(0).to_field(), s.derivative(1).to_field(), s.derivative(2).to_field()])
}

/// ∂_i∂_j u; the mixed partials are computed once and mirrored.
pub fn hessian(u: &ScalarField) -> TwoTensorField {
    let s = u.spectrum();
    let d: Vec<Spectrum> = (0..3).map(|a| s.derivative(a)).collect();
    let mut comps: Vec<Option<ScalarField>> = vec![None; 9];
    for i in 0..3 {
        for j in i..3 {
            let f = d[i].derivative(j).to_field();
            comps[3 * j + i] = Some(f.clone());
            comps[3 * i + j] = Some(f);
        }
    }
    TwoTensorField::new(comps.into_iter().map(|c| c.expect("filled")).collect())
}

pub fn laplacian_flat(u: &ScalarField) -> ScalarField {
    u.spectrum().laplacian().to_field()
}

/// Σ_{i≤k} ‖∇ⁱu‖_{L^p} with flat pointwise norms, k ∈ {0, 1, 2}.
pub fn sobolev_norm_flat(u: &ScalarField, k: usize, p: f64) -> Result<f64> {
    if k > 2 {
        return Err(Error::Domain(format!("Sobolev order {k} not supported")));
    }
    let mut total = lp_norm(u, p)?;
    if k >= 1 {
        total += lp_norm(&gradient(u), p)?;
    }
    if k >= 2 {
        total += lp_norm(&hessian(u), p)?;
    }
    Ok(total)
}

pub fn mean_zero_project(u: &ScalarField) -> ScalarField {
    let m = u.mean();
    u.map(|v| v - m)
}

/// Relative mean tolerance for the inverse Laplacian.
pub const MEAN_ZERO_TOL: f64 = 1e-10;

pub fn inverse_laplacian_flat(u: &ScalarField) -> Result<ScalarField> {
    let mean = u.mean();
    let norm = lp_norm(u, 2.0)?;
    if mean.abs() > MEAN_ZERO_TOL * norm {
        return Err(Error::NotMeanZero { mean, norm });
    }
    Ok(u.spectrum().inverse_laplacian().to_field())
}
