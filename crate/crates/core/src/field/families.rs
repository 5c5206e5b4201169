//! Seeded test-function families: single Fourier modes, random band-limited
//! fields and products of low modes.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{lp_norm, mean_zero_project, GridSpec, ScalarField, Spectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    SingleMode,
    RandomBandLimited,
    ProductOfModes,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::SingleMode => "mode",
            Family::RandomBandLimited => "band",
            Family::ProductOfModes => "product",
        }
    }
}

/// A seeded member of a family, labelled for records.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub id: String,
    pub field: ScalarField,
}

/// Independent generator for case `index` of a run seeded by `seed`.
pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// a·sin(2π k·x + φ).
pub fn single_mode(grid: GridSpec, k: [i64; 3], amplitude: f64, phase: f64) -> ScalarField {
    grid.sample(|x| {
        let arg = 2.0 * PI * (k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]) + phase;
        amplitude * arg.sin()
    })
}

/// Default band limit N/4.
pub fn default_top(grid: GridSpec) -> usize {
    grid.n() / 4
}

/// Real part of a random spectrum supported on max|k_i| ≤ top, with amplitudes
/// decaying like (1+|k|²)⁻¹, scaled to unit L² norm.
pub fn random_band_limited(grid: GridSpec, rng: &mut impl Rng, top: usize, mean_zero: bool) -> ScalarField {
    let n = grid.n();
    assert!(top < n / 2, "band limit must stay below the Nyquist frequency");
    let mut coeffs = vec![Complex64::default(); grid.len()];
    let t = top as i64;
    for k1 in -t..=t {
        for k2 in -t..=t {
            for k3 in -t..=t {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                if mean_zero && k1 == 0 && k2 == 0 && k3 == 0 {
                    continue;
                }
                let decay = 1.0 / (1.0 + (k1 * k1 + k2 * k2 + k3 * k3) as f64);
                let idx = grid.index(
                    k1.rem_euclid(n as i64) as usize,
                    k2.rem_euclid(n as i64) as usize,
                    k3.rem_euclid(n as i64) as usize,
                );
                coeffs[idx] = Complex64::new(re, im) * decay;
            }
        }
    }
    let u = Spectrum::from_coeffs(grid, coeffs).to_field();
    let norm = lp_norm(&u, 2.0).expect("p = 2 is valid");
    u.scale(1.0 / norm)
}

/// Product of two or three modes sin/cos(2π k·x + φ) with |k_i| ≤ 2.
pub fn product_of_modes(grid: GridSpec, rng: &mut impl Rng, mean_zero: bool) -> ScalarField {
    let factors = rng.gen_range(2..=3);
    let mut u = ScalarField::constant(grid, 1.0);
    for _ in 0..factors {
        let mut k = [0i64; 3];
        while k == [0, 0, 0] {
            k = [rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2)];
        }
        let phase = rng.gen_range(0.0..2.0 * PI);
        u = u.mul(&single_mode(grid, k, 1.0, phase));
    }
    if mean_zero {
        u = mean_zero_project(&u);
    }
    u
}

/// Low single modes cycled deterministically by index.
pub fn indexed_mode(grid: GridSpec, index: u64) -> ([i64; 3], ScalarField) {
    const MODES: [[i64; 3]; 8] = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0], [1, -1, 1], [2, 0, 1], [0, 2, -1], [2, 1, 1]];
    let k = MODES[(index as usize) % MODES.len()];
    let phase = (index / MODES.len() as u64) as f64 * 0.5;
    (k, single_mode(grid, k, 1.0, phase))
}

/// `count` members of `family` for run seed `seed`.
pub fn cases(family: Family, grid: GridSpec, seed: u64, count: usize, mean_zero: bool) -> Vec<TestFunction> {
    (0..count as u64)
        .map(|i| {
            let mut rng = case_rng(seed, i);
            let field = match family {
                Family::SingleMode => indexed_mode(grid, i).1,
                Family::RandomBandLimited => random_band_limited(grid, &mut rng, default_top(grid), mean_zero),
                Family::ProductOfModes => product_of_modes(grid, &mut rng, mean_zero),
            };
            TestFunction {
                id: format!("{}-{seed}-{i:04}", family.label()),
                field,
            }
        })
        .collect()
}
