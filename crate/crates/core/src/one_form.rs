//! Harmonic 1-form in the class of dx_a on a perturbed torus.
//!
//! ξ solves Δᵍξ = d*_g dx_a and ω = dx_a ± dξ is closed by construction; the
//! sign is chosen by the smaller codifferential residual.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::snapshot::{write_snapshot, SnapshotHeader};
use crate::field::{gradient, hessian, inverse_laplacian_flat, lp_norm, mean_zero_project, OneFormField, ScalarField};
use crate::interval::IntervalValue;
use crate::ledger::{ChristoffelBound, Ledger, LedgerConfig};
use crate::metric::{Geometry, MetricField};

/// |∫ rhs √det g| allowed before the right-hand side counts as incompatible.
pub const COMPATIBILITY_TOL: f64 = 1e-8;
/// Iterations without a 10% residual improvement before the solver gives up.
/// On an under-resolved grid the residual stalls at the discrete
/// compatibility defect instead of reaching the tolerance.
pub const STALL_WINDOW: usize = 10;
/// Relative d*_g ω residual a certificate accepts.
pub const CERTIFIED_RESIDUAL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500 }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    /// mean zero with respect to vol_g
    pub xi: ScalarField,
    pub iterations: usize,
    /// ‖Δᵍξ − rhs‖_{L²} / ‖rhs‖_{L²}
    pub residual: f64,
}

fn relative_residual(geo: &Geometry, xi: &ScalarField, rhs: &ScalarField, rhs_norm: f64) -> Result<(ScalarField, f64)> {
    let r = geo.laplace_beltrami(xi).sub(rhs);
    let rel = lp_norm(&r, 2.0)? / rhs_norm;
    Ok((r, rel))
}

/// Solves Δᵍu = rhs by flat-preconditioned Richardson iteration
/// u ← u − Δ⁻¹(Δᵍu − rhs), projecting the residual to flat mean zero.
/// A fixed point has Δᵍu − rhs constant, and compatibility forces the
/// constant to vanish.
pub fn solve_laplace_beltrami(geo: &Geometry, rhs: &ScalarField, opts: SolverOptions) -> Result<Solution> {
    let rhs_norm = lp_norm(rhs, 2.0)?;
    if rhs_norm == 0.0 {
        return Err(Error::DegenerateRhs);
    }
    let integral = geo.inner_product(rhs, &ScalarField::constant(geo.grid(), 1.0));
    if integral.abs() > COMPATIBILITY_TOL {
        return Err(Error::IncompatibleRhs { integral });
    }
    let mut u = ScalarField::zeros(geo.grid());
    let (mut r, mut rel) = relative_residual(geo, &u, rhs, rhs_norm)?;
    let (mut iterations, mut best, mut stalled) = (0, rel, 0);
    while rel > opts.tol {
        if iterations == opts.max_iter || stalled == STALL_WINDOW || !rel.is_finite() {
            return Err(Error::NoConvergence { iterations, max_iter: opts.max_iter, residual: rel });
        }
        u = u.sub(&inverse_laplacian_flat(&mean_zero_project(&r))?);
        (r, rel) = relative_residual(geo, &u, rhs, rhs_norm)?;
        iterations += 1;
        if rel < 0.9 * best {
            (best, stalled) = (rel, 0);
        } else {
            stalled += 1;
        }
    }
    let xi = geo.mean_zero_project(&u);
    let (_, residual) = relative_residual(geo, &xi, rhs, rhs_norm)?;
    Ok(Solution { xi, iterations, residual })
}

/// ξ with Δᵍξ = d*_g dx_axis. A vanishing right-hand side (flat metric) has
/// the exact solution ξ = 0 and skips the iteration.
pub fn solve_xi(geo: &Geometry, axis: usize, opts: SolverOptions) -> Result<Solution> {
    let rhs = geo.codifferential(&OneFormField::coordinate(geo.grid(), axis));
    if rhs.max_abs() == 0.0 {
        return Ok(Solution { xi: ScalarField::zeros(geo.grid()), iterations: 0, residual: 0.0 });
    }
    solve_laplace_beltrami(geo, &rhs, opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// ω = dx_axis ± dξ.
pub fn build_one_form(xi: &ScalarField, axis: usize, sign: Sign) -> OneFormField {
    let s = sign.factor();
    let dxi = gradient(xi);
    let comps = std::array::from_fn(|j| {
        let base = if j == axis { 1.0 } else { 0.0 };
        dxi.component(j).map(|d| base + s * d)
    });
    OneFormField::new(comps)
}

/// max over i < j of |∂_iω_j − ∂_jω_i|.
pub fn exterior_residual(omega: &OneFormField) -> f64 {
    let d: Vec<OneFormField> = (0..3).map(|j| gradient(&omega.component(j))).collect();
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in i + 1..3 {
            let (a, b) = (d[j].raw(i), d[i].raw(j));
            worst = a.iter().zip(b).fold(worst, |m, (x, y)| m.max((x - y).abs()));
        }
    }
    worst
}

/// Lower bound for the continuum minimum of f given its grid samples: a grid
/// point lies within √3h/2 of any minimiser, so the gap is at most
/// (3h²/8)·‖D²f‖_op ≤ (9h²/8)·max|∂_i∂_j f|.
pub fn sampling_slack(f: &ScalarField) -> f64 {
    let h = f.grid().spacing();
    let hess = hessian(f);
    let mut m = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            m = m.max(hess.component(i, j).max_abs());
        }
    }
    9.0 * h * h / 8.0 * m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Flat,
    /// ε(δ') > 0: the nowhere-vanishing bound is in force
    Theorem,
    /// ε(δ') is non-positive or undefined, so only min|ω|_g > 0 is checked
    BeyondTheorem,
}

/// ε(δ') under one ledger configuration, or why it is unavailable.
#[derive(Clone, Debug, Serialize)]
pub struct EpsilonBound {
    pub christoffel: ChristoffelBound,
    pub value: Option<IntervalValue>,
    pub status: String,
}

impl EpsilonBound {
    fn eval(ledger: &Ledger, delta: f64) -> Self {
        match ledger.eval("epsilon_one_form", Some(delta)) {
            Ok(v) => Self { christoffel: ledger.config().christoffel, value: Some(v), status: "ok".into() },
            Err(e) => Self { christoffel: ledger.config().christoffel, value: None, status: e.to_string() },
        }
    }

    pub fn positive(&self) -> bool {
        self.value.is_some_and(|v| v.lo() > 0.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OneFormCertificate {
    pub axis: usize,
    pub grid_n: usize,
    pub delta_nominal: f64,
    pub delta_measured: f64,
    /// δ' used for the ledger lookups
    pub delta_effective: f64,
    pub min_pointwise_norm: f64,
    pub sampling_slack: f64,
    pub epsilon_bound: EpsilonBound,
    /// ε recomputed with the first-order Christoffel bound
    pub epsilon_derived: EpsilonBound,
    pub epsilon_clause: Option<bool>,
    pub epsilon_derived_clause: Option<bool>,
    /// ‖d*_g ω‖_{g,L²}
    pub residual_codifferential: f64,
    /// ‖d*_g ω‖_{g,L²} / ‖d*_g dx_axis‖_{g,L²}, zero when the latter vanishes
    pub residual_codifferential_relative: f64,
    pub residual_exterior: f64,
    pub solver_iterations: usize,
    pub solver_residual: f64,
    pub solver_tol: f64,
    pub sign: Sign,
    /// relative residual of the rejected sign
    pub rejected_sign_residual: f64,
    pub periods: [f64; 3],
    pub regime: Regime,
    pub pass: bool,
}

fn epsilon_clause(eps: &EpsilonBound, min_norm: f64, slack: f64) -> Option<bool> {
    eps.positive().then(|| min_norm >= eps.value.unwrap().lo() - slack)
}

/// Outcome of the sign selection between dx_a + dξ and dx_a − dξ.
#[derive(Clone, Copy, Debug)]
pub struct SignChoice {
    pub sign: Sign,
    pub rejected_residual: f64,
}

/// Certifies ω = dx_axis ± dξ against the ledger; `solution` holds ξ.
pub fn certify(
    ledger: &Ledger,
    geo: &Geometry,
    omega: &OneFormField,
    axis: usize,
    solution: &Solution,
    opts: SolverOptions,
    choice: SignChoice,
) -> Result<OneFormCertificate> {
    let metric = geo.metric();
    let delta_effective = metric.effective_delta()?;
    let norm = geo.norm_one_form(omega);
    let min_pointwise_norm = norm.min();
    let sampling_slack = sampling_slack(&norm);
    let (residual_codifferential, residual_codifferential_relative) =
        codifferential_residual(geo, &solution.xi, axis, choice.sign)?;

    let epsilon_bound = EpsilonBound::eval(ledger, delta_effective);
    let derived = Ledger::new(LedgerConfig { christoffel: ChristoffelBound::Linear, ..ledger.config() });
    let epsilon_derived = EpsilonBound::eval(&derived, delta_effective);
    let clause = epsilon_clause(&epsilon_bound, min_pointwise_norm, sampling_slack);
    let regime = if metric.measured_c1_distance() == 0.0 {
        Regime::Flat
    } else if clause.is_some() {
        Regime::Theorem
    } else {
        Regime::BeyondTheorem
    };
    let pass = min_pointwise_norm > 0.0 && residual_codifferential_relative <= CERTIFIED_RESIDUAL && clause != Some(false);
    Ok(OneFormCertificate {
        axis,
        grid_n: geo.grid().n(),
        delta_nominal: metric.delta_nominal(),
        delta_measured: metric.measured_c1_distance(),
        delta_effective,
        min_pointwise_norm,
        sampling_slack,
        epsilon_derived_clause: epsilon_clause(&epsilon_derived, min_pointwise_norm, sampling_slack),
        epsilon_bound,
        epsilon_derived,
        epsilon_clause: clause,
        residual_codifferential,
        residual_codifferential_relative,
        residual_exterior: exterior_residual(omega),
        solver_iterations: solution.iterations,
        solver_residual: solution.residual,
        solver_tol: opts.tol,
        sign: choice.sign,
        rejected_sign_residual: choice.rejected_residual,
        periods: std::array::from_fn(|j| omega.component(j).mean()),
        regime,
        pass,
    })
}

/// Absolute and relative ‖d*_g ω‖_{g,L²} for ω = dx_axis ± dξ, evaluated as
/// d*_g dx_axis ± d*_g dξ. Forming ω first would round ∂_axis ξ against the
/// unit component and swamp the residual when ξ is tiny.
fn codifferential_residual(geo: &Geometry, xi: &ScalarField, axis: usize, sign: Sign) -> Result<(f64, f64)> {
    let base = geo.codifferential(&OneFormField::coordinate(geo.grid(), axis));
    let dxi = geo.codifferential(&gradient(xi));
    let s = sign.factor();
    let abs = geo.lp_norm(&base.zip_map(&dxi, |a, b| a + s * b), 2.0)?;
    let scale = geo.lp_norm(&base, 2.0)?;
    Ok((abs, if scale == 0.0 { 0.0 } else { abs / scale }))
}

/// Full pipeline: solve for ξ, build both sign candidates, keep the one with
/// the smaller codifferential residual and certify it.
pub fn harmonic_one_form(
    ledger: &Ledger,
    g: &MetricField,
    axis: usize,
    opts: SolverOptions,
) -> Result<(OneFormField, OneFormCertificate)> {
    if axis > 2 {
        return Err(Error::Domain(format!("axis {axis} is not one of 0, 1, 2")));
    }
    let geo = Geometry::new(g)?;
    let solution = solve_xi(&geo, axis, opts)?;
    let rp = codifferential_residual(&geo, &solution.xi, axis, Sign::Plus)?.1;
    let rm = codifferential_residual(&geo, &solution.xi, axis, Sign::Minus)?.1;
    let choice = if rm < rp {
        SignChoice { sign: Sign::Minus, rejected_residual: rp }
    } else {
        SignChoice { sign: Sign::Plus, rejected_residual: rm }
    };
    let omega = build_one_form(&solution.xi, axis, choice.sign);
    let cert = certify(ledger, &geo, &omega, axis, &solution, opts, choice)?;
    Ok((omega, cert))
}

pub fn write_one_form_snapshot(stem: &Path, omega: &OneFormField, seed: Option<u64>) -> Result<()> {
    let header = SnapshotHeader::new(omega.grid().n(), "one_form", seed, 3);
    write_snapshot(stem, &header, &[omega.raw(0), omega.raw(1), omega.raw(2)])
}
