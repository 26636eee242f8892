//! High-precision complex scalars and the precision policy shared by all
//! evaluators.
//!
//! Every quantity in the verification engine is a [`CScalar`]: a pair of
//! MPFR floats carrying the working precision of the enclosing
//! [`PrecisionContext`]. The context also owns the residual acceptance
//! threshold and the theta truncation policy.

use crate::error::{Error, Result};
use rug::float::Round;
use rug::Float;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Precision, truncation and tolerance policy for one verification run.
///
/// Immutable after construction; cheap to clone and safe to share across
/// concurrent workers.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionContext {
    precision_bits: u32,
    guard_bits: u32,
    theta_truncation: u64,
    tolerance: f64,
}

impl PrecisionContext {
    /// Create a context. `precision_bits` is the mantissa size per real
    /// component; `guard_bits` extend the working precision to absorb
    /// rounding and truncation tails.
    pub fn new(precision_bits: u32, guard_bits: u32, tolerance: f64) -> Result<Self> {
        if precision_bits < 64 {
            return Err(Error::PrecisionTooLow(precision_bits));
        }
        if !tolerance.is_finite() || tolerance <= 0.0 {
            return Err(Error::NonPositiveTolerance(tolerance));
        }
        Ok(Self {
            precision_bits,
            guard_bits,
            theta_truncation: 1,
            tolerance,
        })
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn guard_bits(&self) -> u32 {
        self.guard_bits
    }

    /// Default number of theta product factors; the effective count is
    /// recomputed per evaluation from |p|.
    pub fn theta_truncation(&self) -> u64 {
        self.theta_truncation
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Same policy, different acceptance threshold.
    pub fn with_tolerance(&self, tolerance: f64) -> Result<Self> {
        Self::new(self.precision_bits, self.guard_bits, tolerance)
    }

    /// Working mantissa size: precision plus guard bits.
    pub fn working_prec(&self) -> u32 {
        self.precision_bits + self.guard_bits
    }

    /// Denominator theta factors below this magnitude mark a parameter set
    /// as degenerate (near the theta vanishing lattice).
    pub fn pole_threshold(&self) -> f64 {
        10f64.powi(-((self.precision_bits / 4) as i32))
    }

    /// Decimal digits that faithfully represent a working-precision value.
    pub fn decimal_digits(&self) -> usize {
        (self.precision_bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2
    }

    /// Lift an f64 exactly into a working-precision real.
    pub fn real(&self, x: f64) -> Float {
        Float::with_val(self.working_prec(), x)
    }

    /// Complex scalar from f64 components (exact lift).
    pub fn scalar(&self, re: f64, im: f64) -> CScalar {
        CScalar {
            re: self.real(re),
            im: self.real(im),
        }
    }

    pub fn from_int(&self, k: i64) -> CScalar {
        CScalar {
            re: Float::with_val(self.working_prec(), k),
            im: Float::with_val(self.working_prec(), 0),
        }
    }

    pub fn zero(&self) -> CScalar {
        self.from_int(0)
    }

    pub fn one(&self) -> CScalar {
        self.from_int(1)
    }
}

/// A complex number with high-precision real and imaginary parts.
///
/// Arithmetic is exact to the working precision of the context that created
/// the operands; division by a value of magnitude 0 is an error, never a
/// silent infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct CScalar {
    re: Float,
    im: Float,
}

impl CScalar {
    pub fn new(re: Float, im: Float) -> Self {
        Self { re, im }
    }

    pub fn re(&self) -> &Float {
        &self.re
    }

    pub fn im(&self) -> &Float {
        &self.im
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Magnitude |z| = hypot(re, im).
    pub fn abs(&self) -> Float {
        self.re.clone().hypot(&self.im)
    }

    pub fn conj(&self) -> CScalar {
        CScalar {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// Multiplicative inverse; errors on a zero operand.
    pub fn recip(&self) -> Result<CScalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let prec = self.prec();
        let norm = Float::with_val(prec, &self.re * &self.re) + Float::with_val(prec, &self.im * &self.im);
        Ok(CScalar {
            re: Float::with_val(prec, &self.re / &norm),
            im: -Float::with_val(prec, &self.im / &norm),
        })
    }

    /// Integer power by repeated squaring; `z^0 = 1`, negative powers go
    /// through the reciprocal and error on zero.
    pub fn pow_int(&self, k: i64) -> Result<CScalar> {
        let prec = self.prec();
        if k == 0 {
            return Ok(CScalar {
                re: Float::with_val(prec, 1),
                im: Float::with_val(prec, 0),
            });
        }
        let base = if k < 0 { self.recip()? } else { self.clone() };
        if k < 0 && base.is_zero() {
            return Err(Error::ZeroToNegativePower);
        }
        let mut exp = k.unsigned_abs();
        let mut acc = CScalar {
            re: Float::with_val(prec, 1),
            im: Float::with_val(prec, 0),
        };
        let mut sq = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &sq;
            }
            exp >>= 1;
            if exp > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// Scale by a real factor.
    pub fn scale(&self, f: &Float) -> CScalar {
        let prec = self.prec().max(f.prec());
        CScalar {
            re: Float::with_val(prec, &self.re * f),
            im: Float::with_val(prec, &self.im * f),
        }
    }

    /// Canonical decimal rendering `<re> + <im>i` / `<re> - <|im|>i` with a
    /// fixed digit count; used for reports and digests.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let re = float_to_decimal(&self.re, digits);
        let im_abs = float_to_decimal(&self.im.clone().abs(), digits);
        let sign = if self.im.is_sign_negative() && !self.im.is_zero() {
            '-'
        } else {
            '+'
        };
        format!("{re} {sign} {im_abs}i")
    }

    /// Parse the rendering produced by [`CScalar::to_decimal_string`].
    pub fn from_decimal_string(s: &str, prec: u32) -> Option<CScalar> {
        let s = s.trim();
        // the separator is spaced, so it cannot collide with exponent signs
        let (re_str, im_str, im_sign) = if let Some(idx) = s.find(" + ") {
            (&s[..idx], &s[idx + 3..], 1)
        } else {
            let idx = s.find(" - ")?;
            (&s[..idx], &s[idx + 3..], -1)
        };
        let im_str = im_str.strip_suffix('i')?;
        let re = Float::with_val(prec, Float::parse(re_str).ok()?);
        let mut im = Float::with_val(prec, Float::parse(im_str).ok()?);
        if im_sign < 0 {
            im = -im;
        }
        Some(CScalar { re, im })
    }
}

/// Fixed-width decimal rendering of one real component.
pub fn float_to_decimal(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let (sign, mantissa, exp) = x.to_sign_string_exp_round(10, Some(digits), Round::Nearest);
    // mantissa holds `digits` significant figures; render as d.ddd...e<exp-1>
    let (head, tail) = mantissa.split_at(1);
    let tail = tail.trim_end_matches('0');
    let exp = exp.unwrap_or(0) - 1;
    let mut out = String::new();
    if sign {
        out.push('-');
    }
    out.push_str(head);
    if !tail.is_empty() {
        out.push('.');
        out.push_str(tail);
    }
    out.push('e');
    out.push_str(&exp.to_string());
    out
}

/// Relative residual |lhs - rhs| / max(|lhs|, |rhs|, 1).
///
/// The floor of 1 keeps the residual meaningful when both sides sit at a
/// legitimate zero of an identity.
pub fn rel_residual(lhs: &CScalar, rhs: &CScalar) -> Float {
    let diff = lhs - rhs;
    let num = diff.abs();
    let prec = num.prec();
    let mut den = lhs.abs().max(&rhs.abs());
    let one = Float::with_val(prec, 1);
    if den < one {
        den = one;
    }
    num / den
}

/// Absolute difference |lhs - rhs|.
pub fn abs_residual(lhs: &CScalar, rhs: &CScalar) -> Float {
    (lhs - rhs).abs()
}

/// Exact binomial C(n, k) for the small exponents appearing in prefactors;
/// returns 0 when n < k.
pub fn binom(n: u32, k: u32) -> i64 {
    if n < k {
        return 0;
    }
    let mut num: i64 = 1;
    for i in 0..k as i64 {
        num = num * (n as i64 - i) / (i + 1);
    }
    num
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $f:expr) => {
        impl<'a, 'b> $trait<&'b CScalar> for &'a CScalar {
            type Output = CScalar;
            fn $method(self, rhs: &'b CScalar) -> CScalar {
                let f: fn(&CScalar, &CScalar) -> CScalar = $f;
                f(self, rhs)
            }
        }
        impl<'a> $trait<&'a CScalar> for CScalar {
            type Output = CScalar;
            fn $method(self, rhs: &'a CScalar) -> CScalar {
                $trait::$method(&self, rhs)
            }
        }
        impl<'a> $trait<CScalar> for &'a CScalar {
            type Output = CScalar;
            fn $method(self, rhs: CScalar) -> CScalar {
                $trait::$method(self, &rhs)
            }
        }
        impl $trait<CScalar> for CScalar {
            type Output = CScalar;
            fn $method(self, rhs: CScalar) -> CScalar {
                $trait::$method(&self, &rhs)
            }
        }
    };
}

impl_binop!(Add, add, |a: &CScalar, b: &CScalar| {
    let prec = a.prec().max(b.prec());
    CScalar {
        re: Float::with_val(prec, &a.re + &b.re),
        im: Float::with_val(prec, &a.im + &b.im),
    }
});

impl_binop!(Sub, sub, |a: &CScalar, b: &CScalar| {
    let prec = a.prec().max(b.prec());
    CScalar {
        re: Float::with_val(prec, &a.re - &b.re),
        im: Float::with_val(prec, &a.im - &b.im),
    }
});

impl_binop!(Mul, mul, |a: &CScalar, b: &CScalar| {
    let prec = a.prec().max(b.prec());
    let re = Float::with_val(prec, &a.re * &b.re) - Float::with_val(prec, &a.im * &b.im);
    let im = Float::with_val(prec, &a.re * &b.im) + Float::with_val(prec, &a.im * &b.re);
    CScalar { re, im }
});

impl_binop!(Div, div, |a: &CScalar, b: &CScalar| {
    let inv = b
        .recip()
        .expect("division by a value of magnitude 0; guard denominators before dividing");
    a * &inv
});

impl Neg for &CScalar {
    type Output = CScalar;
    fn neg(self) -> CScalar {
        CScalar {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

impl Neg for CScalar {
    type Output = CScalar;
    fn neg(self) -> CScalar {
        -&self
    }
}

impl fmt::Display for CScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string(20))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256, 32, 1e-35).unwrap()
    }

    #[test]
    fn context_constructor_enforces_floor() {
        assert!(PrecisionContext::new(256, 32, 1e-35).is_ok());
        assert!(PrecisionContext::new(64, 0, 1e-10).is_ok());
        assert!(matches!(
            PrecisionContext::new(32, 0, 1e-5),
            Err(Error::PrecisionTooLow(32))
        ));
        assert!(matches!(
            PrecisionContext::new(128, 0, 0.0),
            Err(Error::NonPositiveTolerance(_))
        ));
    }

    #[test]
    fn fresh_context_starts_with_unit_truncation() {
        assert_eq!(ctx().theta_truncation(), 1);
        assert_eq!(ctx().working_prec(), 288);
    }

    #[test]
    fn residual_of_equal_inputs_is_zero() {
        let c = ctx();
        let one = c.one();
        assert!(rel_residual(&one, &one).is_zero());
        let zero = c.zero();
        assert!(rel_residual(&zero, &zero).is_zero());
    }

    #[test]
    fn residual_matches_definition_near_one() {
        let c = ctx();
        let lhs = c.one();
        let rhs = &c.one() + &c.scalar(1e-10, 0.0);
        let r = rel_residual(&lhs, &rhs);
        let expected = 1e-10 / (1.0 + 1e-10);
        assert!((r.to_f64() - expected).abs() < 1e-24);
    }

    #[test]
    fn pow_int_examples() {
        let c = ctx();
        let z = c.scalar(0.3, -1.7);
        assert_eq!(z.pow_int(0).unwrap(), c.one());
        let two = c.from_int(2);
        assert_eq!(two.pow_int(3).unwrap(), c.from_int(8));
        let i = c.scalar(0.0, 1.0);
        let i2 = i.pow_int(2).unwrap();
        assert!(rel_residual(&i2, &c.from_int(-1)).to_f64() < 1e-80);
    }

    #[test]
    fn negative_power_of_zero_is_an_error() {
        let c = ctx();
        assert!(matches!(
            c.zero().pow_int(-2),
            Err(Error::DivisionByZero) | Err(Error::ZeroToNegativePower)
        ));
        assert!(c.zero().recip().is_err());
    }

    #[test]
    fn division_is_exact_inverse_of_multiplication() {
        let c = ctx();
        let a = c.scalar(1.25, -0.5);
        let b = c.scalar(-0.75, 2.0);
        let q = &(&a * &b) / &b;
        assert!(rel_residual(&q, &a).to_f64() < 1e-80);
    }

    #[test]
    fn binomials_are_exact() {
        assert_eq!(binom(1, 2), 0);
        assert_eq!(binom(2, 3), 0);
        assert_eq!(binom(5, 2), 10);
        assert_eq!(binom(6, 3), 20);
        assert_eq!(binom(10, 3), 120);
    }

    #[test]
    fn decimal_string_round_trips() {
        let c = ctx();
        let z = c.scalar(-1.0 / 3.0, 2.0e-7);
        let s = z.to_decimal_string(c.decimal_digits());
        let back = CScalar::from_decimal_string(&s, c.working_prec()).unwrap();
        assert!(rel_residual(&z, &back).to_f64() < 1e-75);
    }

    proptest! {
        #[test]
        fn pow_int_is_additive_in_the_exponent(
            re in -3f64..3.0,
            im in -3f64..3.0,
            a in -6i64..6,
            b in -6i64..6,
        ) {
            let c = ctx();
            let z = c.scalar(re, im);
            prop_assume!(z.abs().to_f64() > 1e-3 && z.abs().to_f64() < 1e3);
            let lhs = z.pow_int(a + b).unwrap();
            let rhs = &z.pow_int(a).unwrap() * &z.pow_int(b).unwrap();
            let bound = 2f64.powi(-(256 - 8));
            prop_assert!(rel_residual(&lhs, &rhs).to_f64() <= bound);
        }

        #[test]
        fn residual_is_symmetric(
            re1 in -10f64..10.0, im1 in -10f64..10.0,
            re2 in -10f64..10.0, im2 in -10f64..10.0,
        ) {
            let c = ctx();
            let x = c.scalar(re1, im1);
            let y = c.scalar(re2, im2);
            prop_assert_eq!(rel_residual(&x, &y), rel_residual(&y, &x));
            prop_assert_eq!(rel_residual(&x, &x).to_f64(), 0.0);
        }
    }
}
