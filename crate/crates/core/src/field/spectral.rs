//! 3D FFT on the N³ grid and Fourier-multiplier calculus.
//!
//! Coefficients are normalized so that u(x) = Σ_k û_k e^{2πi k·x}; the mean of
//! u is û_0 and Σ|û_k|² equals the grid mean of |u|².

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{GridSpec, ScalarField};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().expect("plan cache lock");
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// Unnormalized in-place 3D transform, x₁ slowest.
fn fft3(data: &mut [Complex64], n: usize, inverse: bool) {
    let p = plans(n);
    let fft = if inverse { &p.inverse } else { &p.forward };
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);

    let mut plane = vec![Complex64::default(); n * n];
    // axis 2: for each x₁ plane, transpose (x₂, x₃) so x₂ becomes contiguous
    for i1 in 0..n {
        let base = i1 * n * n;
        for i2 in 0..n {
            for i3 in 0..n {
                plane[i3 * n + i2] = data[base + i2 * n + i3];
            }
        }
        fft.process_with_scratch(&mut plane, &mut scratch);
        for i2 in 0..n {
            for i3 in 0..n {
                data[base + i2 * n + i3] = plane[i3 * n + i2];
            }
        }
    }
    // axis 1: for each x₂, gather lines along x₁
    for i2 in 0..n {
        for i1 in 0..n {
            for i3 in 0..n {
                plane[i3 * n + i1] = data[(i1 * n + i2) * n + i3];
            }
        }
        fft.process_with_scratch(&mut plane, &mut scratch);
        for i1 in 0..n {
            for i3 in 0..n {
                data[(i1 * n + i2) * n + i3] = plane[i3 * n + i1];
            }
        }
    }
}

/// Signed frequency of index `i`; the Nyquist index maps to +N/2.
pub fn frequency(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Frequency used for differentiation: the Nyquist mode is dropped.
pub fn derivative_frequency(i: usize, n: usize) -> f64 {
    if i == n / 2 {
        0.0
    } else {
        frequency(i, n) as f64
    }
}

/// Fourier coefficients of a real field.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn from_field(u: &ScalarField) -> Self {
        let n = u.grid().n();
        let mut data: Vec<Complex64> = u.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft3(&mut data, n, false);
        let scale = 1.0 / u.grid().len() as f64;
        for c in &mut data {
            *c *= scale;
        }
        Self { grid: u.grid(), coeffs: data }
    }

    /// Build from arbitrary coefficients; `to_field` keeps the real part, which
    /// amounts to symmetrizing them.
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.len(), "coefficient count must match the grid");
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn to_field(&self) -> ScalarField {
        let mut data = self.coeffs.clone();
        fft3(&mut data, self.grid.n(), true);
        ScalarField::new(self.grid, data.into_iter().map(|c| c.re).collect()).expect("grid size matches")
    }

    /// Multiply every coefficient by `m(k₁, k₂, k₃)` with derivative frequencies.
    fn map_multiplier(&self, m: impl Fn(f64, f64, f64) -> Complex64) -> Self {
        let n = self.grid.n();
        let k: Vec<f64> = (0..n).map(|i| derivative_frequency(i, n)).collect();
        let mut coeffs = self.coeffs.clone();
        for i1 in 0..n {
            for i2 in 0..n {
                let row = (i1 * n + i2) * n;
                for i3 in 0..n {
                    coeffs[row + i3] *= m(k[i1], k[i2], k[i3]);
                }
            }
        }
        Self { grid: self.grid, coeffs }
    }

    /// ∂/∂x_axis, axis in 0..3.
    pub fn derivative(&self, axis: usize) -> Self {
        assert!(axis < 3, "axis must be 0, 1 or 2");
        self.map_multiplier(|k1, k2, k3| {
            let k = [k1, k2, k3][axis];
            Complex64::new(0.0, 2.0 * PI * k)
        })
    }

    /// Trace of the composed second derivatives.
    pub fn laplacian(&self) -> Self {
        self.map_multiplier(|k1, k2, k3| Complex64::new(-4.0 * PI * PI * (k1 * k1 + k2 * k2 + k3 * k3), 0.0))
    }

    /// Pseudo-inverse of `laplacian`: modes where its multiplier vanishes map to zero.
    pub fn inverse_laplacian(&self) -> Self {
        self.map_multiplier(|k1, k2, k3| {
            let m = -4.0 * PI * PI * (k1 * k1 + k2 * k2 + k3 * k3);
            if m == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0 / m, 0.0)
            }
        })
    }

    /// Σ|û_k|².
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Spectral interpolation onto a finer even grid. The Nyquist mode is split
    /// evenly between ±N/2 so the interpolant stays real.
    pub fn upsample(&self, target: GridSpec) -> Self {
        let (n, m) = (self.grid.n(), target.n());
        assert!(m >= n, "upsampling needs a grid at least as fine");
        let axis_targets: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| {
                if i == n / 2 && m > n {
                    vec![(n / 2, 0.5), (m - n / 2, 0.5)]
                } else {
                    vec![(frequency(i, n).rem_euclid(m as i64) as usize, 1.0)]
                }
            })
            .collect();
        let mut coeffs = vec![Complex64::default(); target.len()];
        for i1 in 0..n {
            for i2 in 0..n {
                for i3 in 0..n {
                    let c = self.coeffs[(i1 * n + i2) * n + i3];
                    for &(a, wa) in &axis_targets[i1] {
                        for &(b, wb) in &axis_targets[i2] {
                            for &(d, wd) in &axis_targets[i3] {
                                coeffs[(a * m + b) * m + d] += c * (wa * wb * wd);
                            }
                        }
                    }
                }
            }
        }
        Self { grid: target, coeffs }
    }
}
