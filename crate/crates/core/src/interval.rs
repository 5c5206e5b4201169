//! Outward-rounded interval arithmetic on `f64`.
//!
//! Every primitive (`+`, `-`, `*`, `/`, `sqrt`) is correctly rounded by IEEE 754,
//! so the exact result lies within half an ulp of the computed one. The error
//! term is recovered exactly (TwoSum for addition, FMA residuals for product,
//! quotient and square root) and the bound is stepped one ulp outward only on
//! the side where the exact value lies. Exact operations therefore stay exact:
//! `9 * 0^2` is `[0, 0]` and `sqrt(1)` is `[1, 1]`.
//!
//! Rational powers are computed from certified integer roots: a candidate root
//! from `powf` is nudged until its rigorous integer power brackets the radicand.
//! No transcendental function from libm enters any enclosure.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = num_rational::Ratio<i64>;

/// Below this magnitude the FMA residual of a product may itself round, so the
/// exactness test is not trusted and both bounds are widened.
const TINY: f64 = 1.0e-290;

/// Rigorous enclosure `[lo, hi]` of a real number.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalValue {
    lo: f64,
    hi: f64,
}

#[derive(Clone, Copy)]
enum Side {
    Exact,
    /// exact value is above the rounded result
    Above,
    /// exact value is below the rounded result
    Below,
    Unknown,
}

fn bounds(r: f64, side: Side) -> (f64, f64) {
    match side {
        Side::Exact => (r, r),
        Side::Above => (r, r.next_up()),
        Side::Below => (r.next_down(), r),
        Side::Unknown => (r.next_down(), r.next_up()),
    }
}

fn sign_side(err: f64) -> Side {
    if err > 0.0 {
        Side::Above
    } else if err < 0.0 {
        Side::Below
    } else {
        Side::Exact
    }
}

fn add_rounded(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    if !s.is_finite() {
        return (s, s);
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    bounds(s, sign_side(err))
}

fn mul_rounded(a: f64, b: f64) -> (f64, f64) {
    if a == 0.0 || b == 0.0 {
        return (0.0, 0.0);
    }
    let p = a * b;
    if !p.is_finite() {
        return (p, p);
    }
    if p.abs() < TINY {
        return bounds(p, Side::Unknown);
    }
    bounds(p, sign_side(a.mul_add(b, -p)))
}

fn div_rounded(a: f64, b: f64) -> (f64, f64) {
    if a == 0.0 {
        return (0.0, 0.0);
    }
    let q = a / b;
    if !q.is_finite() {
        return (q, q);
    }
    if q.abs() < TINY || a.abs() < TINY {
        return bounds(q, Side::Unknown);
    }
    // a - q*b is exact; the true quotient is q + rem/b.
    let rem = (-q).mul_add(b, a);
    let side = if rem == 0.0 {
        Side::Exact
    } else if (rem > 0.0) == (b > 0.0) {
        Side::Above
    } else {
        Side::Below
    };
    bounds(q, side)
}

fn sqrt_rounded(a: f64) -> (f64, f64) {
    if a == 0.0 {
        return (0.0, 0.0);
    }
    let s = a.sqrt();
    if a < TINY {
        return bounds(s, Side::Unknown);
    }
    bounds(s, sign_side((-s).mul_add(s, a)))
}

impl IntervalValue {
    pub const ZERO: IntervalValue = IntervalValue { lo: 0.0, hi: 0.0 };
    pub const ONE: IntervalValue = IntervalValue { lo: 1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::Domain(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// Degenerate interval holding an exactly representable value.
    pub fn point(x: f64) -> Self {
        assert!(x.is_finite(), "interval point must be finite");
        Self { lo: x, hi: x }
    }

    /// Enclosure of pi: `f64::consts::PI` is the double just below pi.
    pub fn pi() -> Self {
        let pi = std::f64::consts::PI;
        Self {
            lo: pi,
            hi: pi.next_up(),
        }
    }

    pub fn from_integer(n: i64) -> Self {
        assert!(n.unsigned_abs() <= 1 << 53, "integer {n} not exact in f64");
        Self::point(n as f64)
    }

    pub fn from_ratio(r: Rational) -> Self {
        let num = Self::from_integer(*r.numer());
        let den = Self::from_integer(*r.denom());
        num.try_div(den).expect("rational denominator is nonzero")
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Every member is strictly below every member of `other`.
    pub fn certainly_lt(&self, other: &Self) -> bool {
        self.hi < other.lo
    }

    pub fn certainly_positive(&self) -> bool {
        self.lo > 0.0
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    pub fn try_div(self, rhs: Self) -> Result<Self> {
        if rhs.contains_zero() {
            return Err(Error::Domain(format!("division by interval {rhs} containing 0")));
        }
        Ok(hull(&[
            div_rounded(self.lo, rhs.lo),
            div_rounded(self.lo, rhs.hi),
            div_rounded(self.hi, rhs.lo),
            div_rounded(self.hi, rhs.hi),
        ]))
    }

    pub fn sqrt(self) -> Result<Self> {
        if self.lo < 0.0 {
            return Err(Error::Domain(format!("square root of interval {self} with negative part")));
        }
        Ok(Self {
            lo: sqrt_rounded(self.lo).0,
            hi: sqrt_rounded(self.hi).1,
        })
    }

    pub fn square(self) -> Self {
        if self.lo >= 0.0 {
            Self {
                lo: mul_rounded(self.lo, self.lo).0,
                hi: mul_rounded(self.hi, self.hi).1,
            }
        } else if self.hi <= 0.0 {
            Self {
                lo: mul_rounded(self.hi, self.hi).0,
                hi: mul_rounded(self.lo, self.lo).1,
            }
        } else {
            let m = self.lo.abs().max(self.hi);
            Self {
                lo: 0.0,
                hi: mul_rounded(m, m).1,
            }
        }
    }

    /// Integer power by repeated squaring; exact powers of exact points stay exact.
    pub fn powi(self, n: u32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        if self.lo >= 0.0 {
            return Self {
                lo: pow_bound(self.lo, n, false),
                hi: pow_bound(self.hi, n, true),
            };
        }
        let mut acc = Self::ONE;
        let mut base = self;
        let mut e = n;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                acc = if first { base } else { acc * base };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        if n % 2 == 0 {
            // even power of a sign-changing interval is non-negative
            Self {
                lo: acc.lo.max(0.0),
                hi: acc.hi,
            }
        } else {
            acc
        }
    }

    /// Certified `q`-th root of a non-negative interval.
    pub fn root(self, q: u32) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("zeroth root".into()));
        }
        if self.lo < 0.0 {
            return Err(Error::Domain(format!("root of interval {self} with negative part")));
        }
        if q == 1 {
            return Ok(self);
        }
        if q == 2 {
            return self.sqrt();
        }
        Ok(Self {
            lo: root_bound(self.lo, q, false),
            hi: root_bound(self.hi, q, true),
        })
    }

    /// `self^(num/den)`. Fractional exponents need a non-negative base, negative
    /// exponents a zero-free one.
    pub fn pow_ratio(self, exponent: Rational) -> Result<Self> {
        let num = *exponent.numer();
        let den = *exponent.denom();
        if self == Self::ONE {
            return Ok(Self::ONE);
        }
        let mag = u32::try_from(num.unsigned_abs())
            .map_err(|_| Error::Domain(format!("exponent {exponent} too large")))?;
        let den = u32::try_from(den).map_err(|_| Error::Domain(format!("exponent {exponent} too large")))?;
        let base = if den == 1 { self } else { self.root(den)? };
        let raised = base.powi(mag);
        if num < 0 {
            Self::ONE.try_div(raised)
        } else {
            Ok(raised)
        }
    }

    pub fn max(self, other: Self) -> Self {
        Self {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn min(self, other: Self) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    /// Smallest interval containing both operands.
    pub fn hull(self, other: Self) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Multiply by an integer, exactly representable scalar.
    pub fn scale(self, k: i64) -> Self {
        self * Self::from_integer(k)
    }
}

fn hull(cands: &[(f64, f64)]) -> IntervalValue {
    let lo = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let hi = cands.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    IntervalValue { lo, hi }
}

/// Lower (`upper == false`) or upper bound of `x^n` for `x >= 0`.
fn pow_bound(x: f64, n: u32, upper: bool) -> f64 {
    let pick = |b: (f64, f64)| if upper { b.1 } else { b.0 };
    let mut acc = 1.0;
    let mut base = x;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc = pick(mul_rounded(acc, base));
        }
        e >>= 1;
        if e > 0 {
            base = pick(mul_rounded(base, base));
        }
    }
    acc
}

/// Largest double `r` with `r^q <= x` (lower) or smallest with `r^q >= x` (upper),
/// up to a few ulps, certified by rigorous integer powers.
fn root_bound(x: f64, q: u32, upper: bool) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return x;
    }
    let mut r = x.powf(1.0 / q as f64);
    if upper {
        while pow_bound(r, q, false) < x {
            r = r.next_up();
        }
        while r > 0.0 && pow_bound(r.next_down(), q, false) >= x {
            r = r.next_down();
        }
    } else {
        while pow_bound(r, q, true) > x {
            r = r.next_down();
        }
        while pow_bound(r.next_up(), q, true) <= x {
            r = r.next_up();
        }
    }
    r
}

impl Add for IntervalValue {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            lo: add_rounded(self.lo, rhs.lo).0,
            hi: add_rounded(self.hi, rhs.hi).1,
        }
    }
}

impl Sub for IntervalValue {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for IntervalValue {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for IntervalValue {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.lo >= 0.0 && rhs.lo >= 0.0 {
            return Self {
                lo: mul_rounded(self.lo, rhs.lo).0,
                hi: mul_rounded(self.hi, rhs.hi).1,
            };
        }
        hull(&[
            mul_rounded(self.lo, rhs.lo),
            mul_rounded(self.lo, rhs.hi),
            mul_rounded(self.hi, rhs.lo),
            mul_rounded(self.hi, rhs.hi),
        ])
    }
}

impl fmt::Debug for IntervalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for IntervalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lo, self.hi)
    }
}

/// `n / d` as an exact rational; panics on a zero denominator.
pub fn ratio(n: i64, d: i64) -> Rational {
    assert!(d != 0, "zero denominator");
    let g = n.gcd(&d);
    Rational::new(n / g, d / g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_operations_stay_exact() {
        let nine = IntervalValue::point(9.0);
        assert_eq!(nine * IntervalValue::ZERO.square(), IntervalValue::ZERO);
        assert_eq!(IntervalValue::ONE.sqrt().unwrap(), IntervalValue::ONE);
        assert_eq!(IntervalValue::point(8.0).root(3).unwrap(), IntervalValue::point(2.0));
        assert_eq!(IntervalValue::point(0.5) + IntervalValue::point(0.25), IntervalValue::point(0.75));
    }

    #[test]
    fn inexact_operations_straddle() {
        let third = IntervalValue::ONE.try_div(IntervalValue::point(3.0)).unwrap();
        assert_eq!(third.hi(), third.lo().next_up());
        let back = third * IntervalValue::point(3.0);
        assert!(back.contains(1.0));
        let s2 = IntervalValue::point(2.0).sqrt().unwrap();
        assert!(s2.square().contains(2.0));
        assert!(s2.width() > 0.0);
    }

    #[test]
    fn pi_encloses_reference_digits() {
        let pi = IntervalValue::pi();
        // 3.14159265358979323846... lies strictly between the two doubles
        assert!(pi.lo() < pi.hi());
        assert_eq!(pi.lo(), std::f64::consts::PI);
    }

    #[test]
    fn division_by_zero_interval_rejected() {
        let z = IntervalValue::new(-1.0, 1.0).unwrap();
        assert!(matches!(IntervalValue::ONE.try_div(z), Err(Error::Domain(_))));
    }

    #[test]
    fn fractional_power_of_negative_rejected() {
        let x = IntervalValue::new(-1.0, 2.0).unwrap();
        assert!(x.pow_ratio(ratio(1, 3)).is_err());
        assert!(x.pow_ratio(ratio(2, 1)).is_ok());
    }

    #[test]
    fn even_power_of_straddling_interval() {
        let x = IntervalValue::new(-2.0, 1.0).unwrap();
        let sq = x.powi(2);
        assert_eq!(sq.lo(), 0.0);
        assert_eq!(sq.hi(), 4.0);
    }

    #[test]
    fn rational_power_certified() {
        let x = IntervalValue::point(27.0);
        let r = x.pow_ratio(ratio(1, 12)).unwrap();
        // 27^(1/12) = 3^(1/4)
        let v = 3f64.sqrt().sqrt();
        assert!(r.lo() <= v.next_up() && v.next_down() <= r.hi());
        assert!(r.width() < 1e-15);
        let y = IntervalValue::point(6.0).pow_ratio(ratio(3, 4)).unwrap();
        assert!(y.powi(4).hull(IntervalValue::ZERO).contains(216.0));
    }

    #[test]
    fn new_rejects_reversed() {
        assert!(IntervalValue::new(2.0, 1.0).is_err());
        assert!(IntervalValue::new(f64::NAN, 1.0).is_err());
    }
}
