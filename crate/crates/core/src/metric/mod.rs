//! Perturbed metrics on T³: construction, pointwise linear algebra and the
//! measured distance to the flat metric.

mod geometry;

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::snapshot::{write_snapshot, SnapshotHeader};
use crate::field::{GridSpec, ScalarField, Spectrum};
use crate::ledger::formulas::check_delta;

pub use geometry::{christoffel_field, codifferential, laplace_beltrami, ChristoffelField, Geometry};

/// Storage order of the six independent entries: 11, 12, 13, 22, 23, 33.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Slot of entry (i, j) in symmetric storage.
pub fn sym(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        (2, 2) => 5,
        _ => panic!("matrix index out of range"),
    }
}

fn kron(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    Conformal,
    Offdiag,
    RandomSeeded,
}

impl PerturbationKind {
    pub const ALL: [PerturbationKind; 3] = [Self::Conformal, Self::Offdiag, Self::RandomSeeded];

    pub fn label(self) -> &'static str {
        match self {
            Self::Conformal => "conformal",
            Self::Offdiag => "offdiag",
            Self::RandomSeeded => "random_seeded",
        }
    }
}

impl std::str::FromStr for PerturbationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.label() == s || k.label().replace('_', "-") == s)
            .ok_or_else(|| Error::Domain(format!("unknown perturbation kind `{s}`")))
    }
}

/// Symmetric positive-definite matrix field g_ij on the grid, stored as the
/// deviation h = g − I so that tiny perturbations keep full precision.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    grid: GridSpec,
    h: [Vec<f64>; 6],
    delta_nominal: f64,
}

impl MetricField {
    /// From full entries g_ij; checks positive definiteness.
    pub fn new(grid: GridSpec, g: [Vec<f64>; 6], delta_nominal: f64) -> Result<Self> {
        let mut h = g;
        for (s, &(i, j)) in SYM_PAIRS.iter().enumerate() {
            h[s].iter_mut().for_each(|v| *v -= kron(i, j));
        }
        Self::from_deviation(grid, h, delta_nominal)
    }

    /// From h = g − I; checks positive definiteness through the leading
    /// principal minors.
    pub fn from_deviation(grid: GridSpec, h: [Vec<f64>; 6], delta_nominal: f64) -> Result<Self> {
        if h.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::InvalidGrid("metric components do not match the grid".into()));
        }
        let m = Self { grid, h, delta_nominal };
        for idx in 0..grid.len() {
            let a = m.at(idx);
            let m1 = a[0][0];
            let m2 = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            if !(m1 > 0.0 && m2 > 0.0 && det3(&a) > 0.0) {
                return Err(Error::SingularMetric { index: idx });
            }
        }
        Ok(m)
    }

    pub fn flat(grid: GridSpec) -> Self {
        Self {
            grid,
            h: std::array::from_fn(|_| vec![0.0; grid.len()]),
            delta_nominal: 0.0,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn delta_nominal(&self) -> f64 {
        self.delta_nominal
    }

    /// g_ij − δ_ij.
    pub fn deviation(&self, i: usize, j: usize) -> &[f64] {
        &self.h[sym(i, j)]
    }

    pub fn component(&self, i: usize, j: usize) -> ScalarField {
        let k = kron(i, j);
        ScalarField::new(self.grid, self.h[sym(i, j)].iter().map(|v| k + v).collect()).expect("grid-sized")
    }

    /// The 3×3 matrix at flat index `idx`.
    pub fn at(&self, idx: usize) -> [[f64; 3]; 3] {
        let mut a = [[0.0; 3]; 3];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = kron(i, j) + self.h[sym(i, j)][idx];
            }
        }
        a
    }

    /// Grid max of |g_ij − δ_ij|.
    pub fn c0_distance(&self) -> f64 {
        self.h.iter().flat_map(|c| c.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Grid max of |∂_a g_ij| over all entries and axes.
    pub fn derivative_distance(&self) -> f64 {
        self.h
            .iter()
            .flat_map(|c| derivatives(self.grid, c))
            .flat_map(|d| d.into_iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// C⁰ part plus first-derivative part; grid maxima, so a lower bound for
    /// the true C¹ distance.
    pub fn measured_c1_distance(&self) -> f64 {
        self.c0_distance() + self.derivative_distance()
    }

    /// δ' fed to ledger lookups: the larger of the measured C¹ distance of g
    /// and the C⁰ distance of g⁻¹, inflated by [`SUP_SAFETY`] because grid
    /// maxima under-estimate suprema.
    pub fn effective_delta(&self) -> Result<f64> {
        let inv = self.inverse_field()?.c0_distance();
        Ok(SUP_SAFETY * self.measured_c1_distance().max(inv))
    }

    pub fn det_field(&self) -> ScalarField {
        let values = (0..self.grid.len()).map(|idx| det3(&self.at(idx))).collect();
        ScalarField::new(self.grid, values).expect("grid-sized")
    }

    /// Pointwise inverse g^{ij}, stored like the metric. Its deviation is
    /// formed as −h·g⁻¹ to avoid cancellation.
    pub fn inverse_field(&self) -> Result<MetricField> {
        let mut inv: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; self.grid.len()]);
        for idx in 0..self.grid.len() {
            let m = invert3(&self.at(idx)).ok_or(Error::SingularMetric { index: idx })?;
            for (s, &(i, j)) in SYM_PAIRS.iter().enumerate() {
                let dev_ij: f64 = (0..3).map(|k| -self.h[sym(i, k)][idx] * m[k][j]).sum();
                let dev_ji: f64 = (0..3).map(|k| -self.h[sym(j, k)][idx] * m[k][i]).sum();
                inv[s][idx] = 0.5 * (dev_ij + dev_ji);
            }
        }
        MetricField::from_deviation(self.grid, inv, self.delta_nominal)
    }

    /// max over grid and entries of |(g·h)_ij − δ_ij|.
    pub fn product_defect(&self, other: &MetricField) -> f64 {
        (0..self.grid.len())
            .map(|idx| {
                let (a, b) = (self.at(idx), other.at(idx));
                let mut worst: f64 = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        let s: f64 = (0..3).map(|k| a[i][k] * b[k][j]).sum();
                        worst = worst.max((s - kron(i, j)).abs());
                    }
                }
                worst
            })
            .fold(0.0, f64::max)
    }

    /// Writes the six entries g_ij as a binary snapshot.
    pub fn write_snapshot(&self, stem: &Path, seed: Option<u64>) -> Result<()> {
        let header = SnapshotHeader::new(self.grid.n(), "metric", seed, 6);
        let full: Vec<Vec<f64>> = SYM_PAIRS.iter().map(|&(i, j)| self.component(i, j).into_values()).collect();
        let comps: Vec<&[f64]> = full.iter().map(|c| c.as_slice()).collect();
        write_snapshot(stem, &header, &comps)
    }
}

/// Inflation applied to grid-measured distances before ledger lookups.
pub const SUP_SAFETY: f64 = 1.05;

pub fn det3(a: &[[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

pub fn invert3(a: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let d = det3(a);
    if !(d > 0.0 || d < 0.0) {
        return None;
    }
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            m[i][j] = (a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]) / d;
        }
    }
    Some(m)
}

/// Sum of three seeded modes a·sin(2π k·x + φ) with 1 ≤ max|k_i| ≤ 2.
fn low_mode_profile(grid: GridSpec, rng: &mut ChaCha8Rng) -> ScalarField {
    let terms: Vec<([f64; 3], f64, f64)> = (0..3)
        .map(|_| {
            let mut k = [0i64; 3];
            while k == [0, 0, 0] {
                k = [rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2)];
            }
            let amp = rng.gen_range(0.5..1.0);
            let phase = rng.gen_range(0.0..2.0 * PI);
            (k.map(|v| v as f64), amp, phase)
        })
        .collect();
    grid.sample(|x| {
        terms
            .iter()
            .map(|(k, a, ph)| a * (2.0 * PI * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]) + ph).sin())
            .sum()
    })
}

/// Symmetric low-mode perturbation P of the given kind, before scaling.
fn perturbation_shape(kind: PerturbationKind, grid: GridSpec, seed: u64) -> [Vec<f64>; 6] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = vec![0.0; grid.len()];
    let mut p: [Vec<f64>; 6] = std::array::from_fn(|_| zero.clone());
    match kind {
        PerturbationKind::Conformal => {
            let s = low_mode_profile(grid, &mut rng).into_values();
            for slot in [0, 3, 5] {
                p[slot] = s.clone();
            }
        }
        PerturbationKind::Offdiag => {
            for slot in [1, 2, 4] {
                p[slot] = low_mode_profile(grid, &mut rng).into_values();
            }
        }
        PerturbationKind::RandomSeeded => {
            for slot in p.iter_mut() {
                *slot = low_mode_profile(grid, &mut rng).into_values();
            }
        }
    }
    p
}

/// Fraction of δ targeted by the measured C¹ distance of a family member.
pub const FAMILY_TARGET: f64 = 0.9;

/// g = I + a·P with a chosen so the measured C¹ distance is 0.9δ.
pub fn perturbation_family(delta: f64, kind: PerturbationKind, grid: GridSpec, seed: u64) -> Result<MetricField> {
    check_delta("perturbation_family", delta)?;
    if delta == 0.0 {
        return Ok(MetricField::flat(grid));
    }
    let shape = MetricField {
        grid,
        h: perturbation_shape(kind, grid, seed),
        delta_nominal: delta,
    };
    let a = FAMILY_TARGET * delta / shape.measured_c1_distance();
    let h = shape.h.map(|c| c.into_iter().map(|p| a * p).collect());
    MetricField::from_deviation(grid, h, delta)
}

/// Scalar spectral derivative of raw values.
pub(crate) fn derivatives(grid: GridSpec, values: &[f64]) -> [Vec<f64>; 3] {
    let s: Spectrum = ScalarField::new(grid, values.to_vec()).expect("grid-sized").spectrum();
    std::array::from_fn(|a| s.derivative(a).to_field().into_values())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(16).unwrap()
    }

    #[test]
    fn zero_delta_is_identity() {
        for kind in PerturbationKind::ALL {
            let g = perturbation_family(0.0, kind, grid(), 1).unwrap();
            assert_eq!(g.c0_distance(), 0.0);
            assert!((0..g.grid().len()).all(|i| g.at(i) == [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]));
            assert_eq!(g.measured_c1_distance(), 0.0);
        }
    }

    #[test]
    fn family_hits_target_band() {
        for kind in PerturbationKind::ALL {
            for delta in [1e-3, 0.01, 0.1] {
                let g = perturbation_family(delta, kind, grid(), 4).unwrap();
                let m = g.measured_c1_distance();
                assert!(m >= 0.5 * delta && m <= delta, "{kind:?} {delta} {m}");
            }
        }
    }

    #[test]
    fn rejects_large_delta() {
        assert!(matches!(
            perturbation_family(1.0 / 6.0, PerturbationKind::Conformal, grid(), 0),
            Err(Error::DeltaOutOfDomain { .. })
        ));
        assert!(perturbation_family(-1e-3, PerturbationKind::Offdiag, grid(), 0).is_err());
    }

    #[test]
    fn diagonal_determinant_and_inverse() {
        let n = grid().len();
        let a = 0.3;
        let g = MetricField::new(grid(), [vec![1.0 + a; n], vec![0.0; n], vec![0.0; n], vec![1.0; n], vec![0.0; n], vec![1.0; n]], 0.0)
            .unwrap();
        assert!(g.det_field().values().iter().all(|&d| (d - (1.0 + a)).abs() < 1e-15));
        let inv = g.inverse_field().unwrap();
        assert!(g.product_defect(&inv) < 1e-15);
    }

    #[test]
    fn singular_metric_rejected() {
        let n = grid().len();
        let mut g11 = vec![1.0; n];
        g11[7] = -0.5;
        let r = MetricField::new(grid(), [g11, vec![0.0; n], vec![0.0; n], vec![1.0; n], vec![0.0; n], vec![1.0; n]], 0.0);
        assert!(matches!(r, Err(Error::SingularMetric { index: 7 })));
    }

    #[test]
    fn sine_conformal_distance() {
        let a = 0.01;
        let s = grid().sample(|x| 1.0 + a * (2.0 * PI * x[0]).sin()).into_values();
        let n = grid().len();
        let g = MetricField::new(grid(), [s.clone(), vec![0.0; n], vec![0.0; n], s.clone(), vec![0.0; n], s], a).unwrap();
        assert!((g.measured_c1_distance() - (a + 2.0 * PI * a)).abs() < 1e-14);
    }

    #[test]
    fn kind_parses() {
        assert_eq!("random-seeded".parse::<PerturbationKind>().unwrap(), PerturbationKind::RandomSeeded);
        assert!("bogus".parse::<PerturbationKind>().is_err());
    }
}
