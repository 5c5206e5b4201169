//! Closed-form constant formulas over interval arithmetic.
//!
//! The `*_from` functions take already-evaluated dependencies, so structural
//! properties (collapse to 27 when C3 vanishes, monotonicity in each input) can
//! be checked without going through the ledger.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{ratio, IntervalValue as I, Rational};

/// Exponent 1/(2p) for p = 4.
pub fn eighth() -> Rational {
    ratio(1, 8)
}

fn int(n: i64) -> I {
    I::from_integer(n)
}

fn rat(n: i64, d: i64) -> I {
    I::from_ratio(ratio(n, d))
}

/// Γ(k/2) for integer k ≥ 1.
pub fn gamma_half(k: u32) -> Result<I> {
    if k == 0 {
        return Err(Error::Domain("Gamma has a pole at 0".into()));
    }
    if k % 2 == 0 {
        let m = k / 2 - 1;
        return Ok((1..=m as i64).fold(I::ONE, |acc, j| acc * int(j)));
    }
    // Γ(k/2) = √π · (k-2)!! / 2^((k-1)/2)
    let mut num = I::ONE;
    let mut j = k as i64 - 2;
    while j > 1 {
        num = num * int(j);
        j -= 2;
    }
    let den = int(1 << ((k - 1) / 2));
    Ok(I::pi().sqrt()? * num.try_div(den)?)
}

/// Γ(x) for x a positive integer or half-integer.
pub fn gamma_rational(x: Rational) -> Result<I> {
    let twice = x * 2;
    if !twice.is_integer() || *twice.numer() <= 0 {
        return Err(Error::Domain(format!(
            "Gamma only supported at positive integers and half-integers, got {x}"
        )));
    }
    let k = u32::try_from(*twice.numer()).map_err(|_| Error::Domain(format!("Gamma argument {x} too large")))?;
    gamma_half(k)
}

/// Volume of the unit ball in ℝⁿ.
pub fn omega(n: u32) -> Result<I> {
    if n == 0 {
        return Ok(I::ONE);
    }
    let pi = I::pi();
    if n % 2 == 0 {
        let m = n / 2;
        let fact = (1..=m as i64).fold(I::ONE, |acc, j| acc * int(j));
        return pi.powi(m).try_div(fact);
    }
    // π^((n-1)/2) · 2^((n+1)/2) / n!!
    let mut dfact = I::ONE;
    let mut j = n as i64;
    while j > 1 {
        dfact = dfact * int(j);
        j -= 2;
    }
    (pi.powi((n - 1) / 2) * int(1 << ((n + 1) / 2))).try_div(dfact)
}

/// Surface measure of the unit (n-1)-sphere in ℝⁿ, equal to n·ω_n.
pub fn sphere_surface(n: u32) -> Result<I> {
    Ok(int(n as i64) * omega(n)?)
}

/// Marcinkiewicz interpolation constant 2(p(r−q)/((p−q)(r−p)))^{1/p}.
pub fn c_marcinkiewicz(p: Rational, q: Rational, r: Rational) -> Result<I> {
    if !(q < p && p < r) {
        return Err(Error::Domain(format!("Marcinkiewicz needs q < p < r, got q={q}, p={p}, r={r}")));
    }
    let base = p * (r - q) / ((p - q) * (r - p));
    Ok(int(2) * I::from_ratio(base).pow_ratio(p.recip())?)
}

pub fn c_integral_bound_cz(n: u32) -> I {
    let n = n as i64;
    int(2 * n * n * (n + 5))
}

pub fn c_fstar_measure(n: u32) -> Result<I> {
    Ok(omega(n)? * int(n as i64).pow_ratio(ratio(n as i64, 2))?)
}

pub fn c_newtonian_d3(n: u32) -> Result<I> {
    let n64 = n as i64;
    int(n64 * (n64 + 5)).try_div(omega(n)?)
}

pub fn c_mu_tg(n: u32) -> I {
    int(1i64 << (n + 2))
}

pub fn c_mu_tb(n: u32) -> Result<I> {
    Ok(int(4) * c_integral_bound_cz(n) + c_fstar_measure(n)?)
}

/// T₁ = 2^{n+2} + 4·2n²(n+5) + ω_n n^{n/2}.
pub fn t1_distribution_constant(n: u32) -> Result<I> {
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    Ok(c_mu_tg(n) + c_mu_tb(n)?)
}

/// Conjugate exponent p/(p−1).
pub fn conjugate(p: Rational) -> Rational {
    p / (p - 1)
}

pub fn c_calderon_zygmund(n: u32, p: Rational) -> Result<I> {
    if p <= Rational::from_integer(1) {
        return Err(Error::Domain(format!("Calderon-Zygmund needs p > 1, got {p}")));
    }
    let two = Rational::from_integer(2);
    if p == two {
        return Ok(I::ONE);
    }
    let p_low = if p > two { conjugate(p) } else { p };
    // 1/p = α/1 + (1−α)/2
    let alpha = two / p_low - 1;
    let t1 = t1_distribution_constant(n)?;
    let t2 = I::ONE;
    let marc = c_marcinkiewicz(p_low, Rational::from_integer(1), two)?;
    Ok(marc * t1.pow_ratio(alpha)? * t2.pow_ratio(Rational::from_integer(1) - alpha)?)
}

pub fn c_poincare(n: u32, volume: I) -> Result<I> {
    if volume.lo() <= 0.0 {
        return Err(Error::Domain(format!("Poincare needs positive volume, got {volume}")));
    }
    volume.try_div(omega(n)?)?.pow_ratio(ratio(1, n as i64))
}

pub fn c_grad_plus_hessian_from(n: u32, c_cz: I, c_poincare: I) -> I {
    let n = int(n as i64);
    n.square() * c_cz * (n * c_poincare + I::ONE)
}

pub fn c_grad_plus_hessian(n: u32, p: Rational, volume: I) -> Result<I> {
    Ok(c_grad_plus_hessian_from(n, c_calderon_zygmund(n, p)?, c_poincare(n, volume)?))
}

/// How ω_{n−1} in the Sobolev constant is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaReading {
    /// surface measure of the unit (n−1)-sphere
    SphereSurface,
    /// volume of the unit ball in ℝ^{n−1}
    BallVolume,
}

pub fn k_sobolev(n: u32, q: Rational, reading: OmegaReading) -> Result<I> {
    let one = Rational::from_integer(1);
    let nr = Rational::from_integer(n as i64);
    if q < one || q >= nr {
        return Err(Error::Domain(format!("Sobolev constant needs 1 <= q < n, got q={q}, n={n}")));
    }
    let w = match reading {
        OmegaReading::SphereSurface => sphere_surface(n)?,
        OmegaReading::BallVolume => omega(n - 1)?,
    };
    let n_i = int(n as i64);
    if q == one {
        return n_i.try_div(w)?.pow_ratio(ratio(1, n as i64))?.try_div(n_i);
    }
    let lead = I::from_ratio((q - 1) / (nr - q));
    let mid = I::from_ratio((nr - q) / (nr * (q - 1))).pow_ratio(q.recip())?;
    let num = gamma_rational(nr + 1)?;
    let den = gamma_rational(nr / q)? * gamma_rational(nr + 1 - nr / q)? * w;
    let tail = num.try_div(den)?.pow_ratio(ratio(1, n as i64))?;
    Ok(lead * mid * tail)
}

/// Cited literal for the Sobolev embedding on the unit cube.
pub fn c_sobolev_cube() -> I {
    rat(53, 4)
}

/// max(ω₃^{−1/4}, (∫_{B(0,1)}|y|^{8/3})^{3/4}) with the integral equal to 12π/17.
pub fn c_morrey_branches() -> Result<(I, I)> {
    let first = omega(3)?.pow_ratio(ratio(-1, 4))?;
    let second = (int(12) * I::pi()).try_div(int(17))?.pow_ratio(ratio(3, 4))?;
    Ok((first, second))
}

pub fn c_morrey() -> Result<I> {
    let (a, b) = c_morrey_branches()?;
    Ok(a.max(b))
}

/// Hölder constant |Ω|^{1/4 − 1/6} for L⁶ → L⁴ on a domain of volume 27.
pub fn c_holder_q_qtilde() -> Result<I> {
    int(27).pow_ratio(ratio(1, 12))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CutoffBounds {
    pub b1: I,
    pub b2: I,
    pub b3: I,
    pub laplacian_chi: I,
    pub d_chi: I,
    pub d2_chi: I,
}

pub fn cutoff_derivative_bounds() -> Result<CutoffBounds> {
    let s3 = int(3).sqrt()?;
    let b1 = int(10).try_div(s3)?;
    let b2 = int(60) * (int(2) * s3 - int(3));
    let b3 = int(20) * (int(5) * s3 - int(6));
    Ok(CutoffBounds {
        b1,
        b2,
        b3,
        laplacian_chi: int(3) * b1,
        d_chi: s3 * b2,
        d2_chi: int(3) * b3,
    })
}

/// 27(1 + C₃·C_Δχ + (2 + 54·27·√17)·C₃·C_Hölder·C_D²χ·K).
pub fn c_schauder_from(c3: I, c_lap_chi: I, c_holder: I, c_d2_chi: I, k_sob: I) -> Result<I> {
    let coeff = int(2) + int(54 * 27) * int(17).sqrt()?;
    let inner = I::ONE + c3 * c_lap_chi + coeff * c3 * c_holder * c_d2_chi * k_sob;
    Ok(int(27) * inner)
}

/// (1/4π²)·C_S·C_cube·(1+27√17) + C_S·(1+27·C_cube).
pub fn c_flat_injectivity_from(c_schauder: I, c_cube: I) -> Result<I> {
    let four_pi2 = int(4) * I::pi().square();
    let first = (c_schauder * c_cube * (I::ONE + int(27) * int(17).sqrt()?)).try_div(four_pi2)?;
    Ok(first + c_schauder * (I::ONE + int(27) * c_cube))
}

/// First nonzero eigenvalue magnitude of the flat Laplacian on T³.
pub fn c_eigen() -> I {
    int(4) * I::pi().square()
}

pub fn c_jost() -> Result<I> {
    int(17).sqrt()
}

/// Which inverse-metric bound feeds the δ-parametric chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseBound {
    /// 2δ as stated in the lemma
    #[default]
    Stated,
    /// 6δ + 36δ³ as obtained in its proof
    Derived,
}

/// Which Christoffel bound feeds the δ-parametric chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChristoffelBound {
    /// 9δ²
    #[default]
    Quadratic,
    /// (3/2)(1 + C_inv)·3δ, the first-order triangle-inequality bound
    Linear,
}

pub fn check_delta(name: &str, delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::DeltaOutOfDomain {
            name: name.into(),
            delta,
            reason: "delta must be a finite nonnegative number".into(),
        });
    }
    if delta >= 1.0 / 6.0 {
        return Err(Error::DeltaOutOfDomain {
            name: name.into(),
            delta,
            reason: "the inverse-metric series bound needs delta < 1/6".into(),
        });
    }
    Ok(())
}

pub fn c_det_lo(d: I) -> I {
    (I::ONE - d).powi(3) - int(2) * d.powi(3) - int(3) * (I::ONE + d) * d.square()
}

pub fn c_det_hi(d: I) -> I {
    (I::ONE + d).powi(3) + int(2) * d.powi(3) + int(3) * (I::ONE + d) * d.square()
}

pub fn c_inv_stated(d: I) -> I {
    int(2) * d
}

pub fn c_inv_derived(d: I) -> I {
    int(6) * d + int(36) * d.powi(3)
}

fn checked_sqrt(name: &str, radicand: I) -> Result<I> {
    if radicand.lo() <= 0.0 {
        return Err(Error::Domain(format!("{name}: radicand {radicand} is not positive")));
    }
    radicand.sqrt()
}

pub fn c_cov_lo(d: I) -> Result<I> {
    checked_sqrt("C_cov_lo", I::ONE - int(3) * d)
}

pub fn c_cov_hi(d: I) -> Result<I> {
    (I::ONE + int(3) * d).sqrt()
}

fn two_tensor_term(d: I) -> I {
    int(9) * (int(2) + int(2) * d) * int(2) * d
}

pub fn c_2tensor_lo(d: I) -> Result<I> {
    checked_sqrt("C_2tensor_lo", I::ONE - two_tensor_term(d))
}

pub fn c_2tensor_hi(d: I) -> Result<I> {
    (I::ONE + two_tensor_term(d)).sqrt()
}

pub fn c_christoffel_quadratic(d: I) -> I {
    int(9) * d.square()
}

pub fn c_christoffel_linear(d: I, inv: I) -> I {
    rat(3, 2) * (I::ONE + inv) * int(3) * d
}

fn det_root(name: &str, det: I) -> Result<I> {
    if det.lo() <= 0.0 {
        return Err(Error::Domain(format!("{name}: determinant bound {det} is not positive")));
    }
    det.pow_ratio(eighth())
}

/// The full record of δ-parametric metric comparison constants at p = 4.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MetricComparison {
    pub delta: f64,
    pub c_det_lo: I,
    pub c_det_hi: I,
    pub c_inv: I,
    pub c_cov_lo: I,
    pub c_cov_hi: I,
    pub c_2t_lo: I,
    pub c_2t_hi: I,
    pub c_christoffel: I,
    pub c_w1p_lo: I,
    pub c_w1p_hi: I,
    /// lower sandwich constant of the W^{2,4} comparison
    pub c_w2p_lo: I,
    /// upper sandwich constant of the W^{2,4} comparison
    pub c_w2p_hi: I,
}

pub fn c_w1p_hi_from(cov_hi: I, det_hi: I) -> Result<I> {
    Ok(cov_hi * det_root("C_W1p_hi", det_hi)?)
}

pub fn c_w1p_lo_from(cov_lo: I, det_lo: I) -> Result<I> {
    Ok(cov_lo * det_root("C_W1p_lo", det_lo)?)
}

/// C_W1p_hi·(1 + 3√3·C_Γ)·C_2t_hi·C_det_hi^{1/8}.
pub fn c_w2p_hi_from(w1p_hi: I, christoffel: I, t2_hi: I, det_hi: I) -> Result<I> {
    let s3 = int(3).sqrt()?;
    Ok(w1p_hi * (I::ONE + int(3) * s3 * christoffel) * t2_hi * det_root("C_W2p_hi", det_hi)?)
}

/// min(C_W1p_lo − 3√3·C_Γ·b, b) with b = C_2t_lo·C_det_lo^{1/8}.
pub fn c_w2p_lo_from(w1p_lo: I, christoffel: I, t2_lo: I, det_lo: I) -> Result<I> {
    let s3 = int(3).sqrt()?;
    let b = t2_lo * det_root("C_W2p_lo", det_lo)?;
    let first = w1p_lo - int(3) * s3 * christoffel * b;
    let value = first.min(b);
    if value.lo() <= 0.0 {
        return Err(Error::Domain(format!("C_W2p_lo: lower comparison constant {value} is not positive")));
    }
    Ok(value)
}

pub fn metric_comparison_constants(
    delta: f64,
    inverse: InverseBound,
    christoffel: ChristoffelBound,
) -> Result<MetricComparison> {
    check_delta("metric_comparison_constants", delta)?;
    let d = I::point(delta);
    let c_det_lo = c_det_lo(d);
    let c_det_hi = c_det_hi(d);
    let c_inv = match inverse {
        InverseBound::Stated => c_inv_stated(d),
        InverseBound::Derived => c_inv_derived(d),
    };
    let c_cov_lo = c_cov_lo(d)?;
    let c_cov_hi = c_cov_hi(d)?;
    let c_2t_lo = c_2tensor_lo(d)?;
    let c_2t_hi = c_2tensor_hi(d)?;
    let c_gamma = match christoffel {
        ChristoffelBound::Quadratic => c_christoffel_quadratic(d),
        ChristoffelBound::Linear => c_christoffel_linear(d, c_inv),
    };
    let c_w1p_lo = c_w1p_lo_from(c_cov_lo, c_det_lo)?;
    let c_w1p_hi = c_w1p_hi_from(c_cov_hi, c_det_hi)?;
    let c_w2p_lo = c_w2p_lo_from(c_w1p_lo, c_gamma, c_2t_lo, c_det_lo)?;
    let c_w2p_hi = c_w2p_hi_from(c_w1p_hi, c_gamma, c_2t_hi, c_det_hi)?;
    Ok(MetricComparison {
        delta,
        c_det_lo,
        c_det_hi,
        c_inv,
        c_cov_lo,
        c_cov_hi,
        c_2t_lo,
        c_2t_hi,
        c_christoffel: c_gamma,
        c_w1p_lo,
        c_w1p_hi,
        c_w2p_lo,
        c_w2p_hi,
    })
}

/// C_det_hi^{1/8} − 1 without cancellation: (C_det_hi − 1)/Σ_{k<8} root^k,
/// using C_det_hi − 1 = 3δ + 6δ² + 6δ³.
pub fn det_hi_root_excess(d: I) -> Result<I> {
    let root = det_root("C_det_hi", c_det_hi(d))?;
    let excess = int(3) * d + int(6) * d.square() + int(6) * d.powi(3);
    let denom = (0..8).fold(I::ZERO, |acc, k| acc + root.powi(k));
    excess.try_div(denom)
}

/// C₁₄ = 3((C_det_hi^{1/8}−1)(1+C_inv) + C_inv) + 9√3(1+C_inv)·C_Γ·C_det_hi^{1/8},
/// taking the excess C_det_hi^{1/8} − 1 as input.
pub fn c_laplacian_comparison_from(root_excess: I, inv: I, christoffel: I) -> Result<I> {
    let s3 = int(3).sqrt()?;
    let first = int(3) * (root_excess * (I::ONE + inv) + inv);
    Ok(first + int(9) * s3 * (I::ONE + inv) * christoffel * (I::ONE + root_excess))
}

/// C₄ = C₁₀·C₁/(1 − C₁·C₁₄), failing unless C₁·C₁₄ < 1 rigorously.
pub fn c_nonflat_injectivity_from(delta: f64, c1: I, c10: I, c14: I) -> Result<I> {
    let product = c1 * c14;
    if product.hi() >= 1.0 {
        return Err(Error::AbsorptionFailure {
            delta,
            product: product.hi(),
        });
    }
    (c10 * c1).try_div(I::ONE - product)
}

/// C_O = C_Morrey·C_cov_hi·C₄/C₁₁.
pub fn c_one_form_injectivity_from(morrey: I, cov_hi: I, c4: I, c11: I) -> Result<I> {
    (morrey * cov_hi * c4).try_div(c11)
}

/// ε = C_cov_lo − C_O·(3 + 9·C_inv)·C_Γ·C_det_hi^{1/8}; with C_inv = 2δ the middle factor is 3 + 18δ.
pub fn epsilon_one_form_from(cov_lo: I, c_o: I, inv: I, christoffel: I, det_hi: I) -> Result<I> {
    let root = det_root("epsilon_one_form", det_hi)?;
    Ok(cov_lo - c_o * (int(3) + int(9) * inv) * christoffel * root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn encloses(iv: I, x: f64, rel: f64) -> bool {
        let slack = x.abs() * rel;
        iv.lo() <= x + slack && x - slack <= iv.hi()
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_half(8).unwrap(), I::point(6.0));
        assert_eq!(gamma_half(2).unwrap(), I::ONE);
        let g = gamma_half(5).unwrap();
        assert!(encloses(g, 0.75 * std::f64::consts::PI.sqrt(), 1e-15));
        assert!(gamma_rational(ratio(1, 3)).is_err());
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(omega(1).unwrap(), I::point(2.0));
        assert!(omega(2).unwrap().contains(std::f64::consts::PI));
        assert!(encloses(omega(3).unwrap(), 4.18879020478639098, 1e-15));
    }

    #[test]
    fn marcinkiewicz_rejects_endpoint() {
        let one = Rational::from_integer(1);
        let two = Rational::from_integer(2);
        assert!(c_marcinkiewicz(one, one, two).is_err());
        assert!(c_marcinkiewicz(two, one, two).is_err());
    }

    #[test]
    fn poincare_trivial_cases() {
        let unit_ball = c_poincare(3, omega(3).unwrap()).unwrap();
        assert!(unit_ball.contains(1.0));
        assert!(unit_ball.width() < 1e-15);
        assert_eq!(c_poincare(1, I::point(2.0)).unwrap(), I::ONE);
        assert!(c_poincare(3, I::ZERO).is_err());
    }

    #[test]
    fn grad_hessian_structure() {
        let v = c_grad_plus_hessian_from(3, I::ZERO, I::point(1.5));
        assert_eq!(v, I::ZERO);
    }

    #[test]
    fn schauder_collapses_without_c3() {
        let b = cutoff_derivative_bounds().unwrap();
        let k = k_sobolev(3, ratio(2, 1), OmegaReading::SphereSurface).unwrap();
        let h = c_holder_q_qtilde().unwrap();
        let s = c_schauder_from(I::ZERO, b.laplacian_chi, h, b.d2_chi, k).unwrap();
        assert_eq!(s, I::point(27.0));
    }

    #[test]
    fn schauder_increases_in_each_dependency() {
        let b = cutoff_derivative_bounds().unwrap();
        let k = k_sobolev(3, ratio(2, 1), OmegaReading::SphereSurface).unwrap();
        let h = c_holder_q_qtilde().unwrap();
        let c3 = I::point(59.25);
        let base = c_schauder_from(c3, b.laplacian_chi, h, b.d2_chi, k).unwrap();
        let bump = |x: I| x * I::point(1.001);
        let variants = [
            c_schauder_from(bump(c3), b.laplacian_chi, h, b.d2_chi, k).unwrap(),
            c_schauder_from(c3, bump(b.laplacian_chi), h, b.d2_chi, k).unwrap(),
            c_schauder_from(c3, b.laplacian_chi, bump(h), b.d2_chi, k).unwrap(),
            c_schauder_from(c3, b.laplacian_chi, h, bump(b.d2_chi), k).unwrap(),
            c_schauder_from(c3, b.laplacian_chi, h, b.d2_chi, bump(k)).unwrap(),
        ];
        for v in variants {
            assert!(base.certainly_lt(&v));
        }
    }

    #[test]
    fn flat_injectivity_structure() {
        let cube = c_sobolev_cube();
        assert_eq!(c_flat_injectivity_from(I::ZERO, cube).unwrap(), I::ZERO);
        let unit = c_flat_injectivity_from(I::ONE, cube).unwrap();
        assert!(encloses(unit, 396.448852382585055, 1e-14));
        assert_eq!(I::point(27.0) * cube, I::point(357.75));
    }

    #[test]
    fn metric_constants_flat() {
        for inv in [InverseBound::Stated, InverseBound::Derived] {
            for ch in [ChristoffelBound::Quadratic, ChristoffelBound::Linear] {
                let m = metric_comparison_constants(0.0, inv, ch).unwrap();
                for v in [
                    m.c_det_lo, m.c_det_hi, m.c_cov_lo, m.c_cov_hi, m.c_2t_lo, m.c_2t_hi, m.c_w1p_lo,
                    m.c_w1p_hi, m.c_w2p_lo, m.c_w2p_hi,
                ] {
                    assert_eq!(v, I::ONE);
                }
                assert_eq!(m.c_christoffel, I::ZERO);
                assert_eq!(m.c_inv, I::ZERO);
            }
        }
    }

    #[test]
    fn metric_constants_domain() {
        let m = metric_comparison_constants(0.01, InverseBound::Stated, ChristoffelBound::Quadratic).unwrap();
        assert!(encloses(m.c_det_hi, 1.030606, 1e-12));
        let err = metric_comparison_constants(0.1, InverseBound::Stated, ChristoffelBound::Quadratic);
        assert!(matches!(err, Err(Error::Domain(_))));
        let err = metric_comparison_constants(1.0 / 6.0, InverseBound::Stated, ChristoffelBound::Quadratic);
        assert!(matches!(err, Err(Error::DeltaOutOfDomain { .. })));
    }

    #[test]
    fn laplacian_comparison_flat_is_zero() {
        let d = I::ZERO;
        let v = c_laplacian_comparison_from(det_hi_root_excess(d).unwrap(), c_inv_stated(d), c_christoffel_quadratic(d)).unwrap();
        assert_eq!(v, I::ZERO);
    }

    #[test]
    fn laplacian_comparison_is_linear_near_zero() {
        let at = |x: f64| {
            let d = I::point(x);
            c_laplacian_comparison_from(det_hi_root_excess(d).unwrap(), c_inv_stated(d), c_christoffel_quadratic(d))
                .unwrap()
        };
        // leading coefficient 3(3/8 + 2) = 57/8
        let small = at(1e-14);
        assert!(small.width() < 1e-12 * small.hi());
        assert_relative_eq!(small.mid() / 1e-14, 57.0 / 8.0, max_relative = 1e-12);
        assert_relative_eq!(at(1e-13).mid() / small.mid(), 10.0, max_relative = 1e-10);
    }

    #[test]
    fn absorption_failure_is_reported() {
        let r = c_nonflat_injectivity_from(0.1, I::point(2.0), I::ONE, I::point(0.5));
        assert!(matches!(r, Err(Error::AbsorptionFailure { .. })));
    }

    #[test]
    fn sobolev_readings() {
        let sphere = k_sobolev(3, ratio(2, 1), OmegaReading::SphereSurface).unwrap();
        let ball = k_sobolev(3, ratio(2, 1), OmegaReading::BallVolume).unwrap();
        assert!(encloses(sphere, 0.427260542862526665, 1e-14));
        assert!(encloses(ball, 0.678233835204478810, 1e-14));
        assert!(k_sobolev(3, ratio(3, 1), OmegaReading::SphereSurface).is_err());
        for q in [ratio(1, 1), ratio(3, 2), ratio(2, 1)] {
            assert!(k_sobolev(3, q, OmegaReading::SphereSurface).unwrap().lo() > 0.0);
        }
        assert!(k_sobolev(4, ratio(2, 1), OmegaReading::BallVolume).unwrap().lo() > 0.0);
    }
}
