//! Scalar types: arbitrary-precision binary floats, complex numbers built on
//! them, and exact Gaussian rationals.
//!
//! [`Real`] always carries an explicit significand width. Binary operations
//! take the wider of the two operands, so mixing a 256-bit value with a
//! freshly constructed 512-bit constant yields a 512-bit result.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_base::Abs;
use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;

type Big = FBig<HalfEven, 2>;
type Dec = FBig<HalfEven, 10>;

/// Arbitrary-precision real number with a fixed significand width in bits.
#[derive(Clone, PartialEq)]
pub struct Real(Big);

impl Real {
    pub fn zero(bits: usize) -> Self {
        Real(Big::ZERO.with_precision(bits).value())
    }

    pub fn one(bits: usize) -> Self {
        Real(Big::ONE.with_precision(bits).value())
    }

    pub fn from_i64(v: i64, bits: usize) -> Self {
        Real(Big::from(v).with_precision(bits).value())
    }

    pub fn from_int(v: &IBig, bits: usize) -> Self {
        Real(Big::from(v.clone()).with_precision(bits).value())
    }

    /// Panics on NaN or infinite input.
    pub fn from_f64(v: f64, bits: usize) -> Self {
        let b = Big::try_from(v).expect("finite f64");
        Real(b.with_precision(bits).value())
    }

    pub fn from_rational(r: &RBig, bits: usize) -> Self {
        let num = Big::from(r.numerator().clone()).with_precision(bits).value();
        let den = Big::from(IBig::from(r.denominator().clone()))
            .with_precision(bits)
            .value();
        Real(num / den)
    }

    /// Parses a decimal literal such as `-1.25e-3`.
    pub fn parse_decimal(s: &str, bits: usize) -> Option<Self> {
        let s = s.trim();
        if s.len() > 2000 {
            return None;
        }
        // Exponents this large only arise from hostile input.
        if let Some((_, e)) = s.split_once(['e', 'E']) {
            if e.parse::<i64>().ok()?.unsigned_abs() > 100_000 {
                return None;
            }
        }
        let d: Dec = s.parse().ok()?;
        Some(Real(d.with_base_and_precision::<2>(bits).value()))
    }

    pub fn bits(&self) -> usize {
        self.0.precision()
    }

    /// Same value rounded to a different width.
    pub fn with_bits(&self, bits: usize) -> Self {
        Real(self.0.clone().with_precision(bits).value())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    /// Decimal rendering with enough digits to round-trip at this width.
    pub fn to_decimal_string(&self) -> String {
        let digits = (self.bits() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 3;
        if self.is_zero() {
            return "0".to_string();
        }
        let d = self.0.clone().with_base_and_precision::<10>(digits).value();
        format!("{d:e}")
    }

    pub fn is_zero(&self) -> bool {
        self.0.repr().significand().is_zero() && self.0.repr().is_finite()
    }

    pub fn is_negative(&self) -> bool {
        !self.is_zero() && self.0.sign() == dashu_base::Sign::Negative
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && self.0.sign() == dashu_base::Sign::Positive
    }

    pub fn abs(&self) -> Self {
        Real(self.0.clone().abs())
    }

    pub fn sqrt(&self) -> Self {
        Real(self.0.sqrt())
    }

    pub fn exp(&self) -> Self {
        Real(self.0.exp())
    }

    /// Natural logarithm; the argument must be positive.
    pub fn ln(&self) -> Self {
        Real(self.0.ln())
    }

    pub fn powi(&self, k: i64) -> Self {
        Real(self.0.powi(IBig::from(k)))
    }

    pub fn recip(&self) -> Self {
        Real::one(self.bits()) / self
    }

    pub fn max_of(a: &Real, b: &Real) -> Real {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// `2^-k` at the given width.
    pub fn pow2(k: i64, bits: usize) -> Self {
        Real::from_i64(2, bits).powi(k)
    }

    /// Relative gap `|a-b| / max(|a|,|b|)`, zero when both vanish.
    pub fn rel_diff(a: &Real, b: &Real) -> Real {
        let scale = Real::max_of(&a.abs(), &b.abs());
        if scale.is_zero() {
            return Real::zero(a.bits().max(b.bits()));
        }
        (a - b).abs() / scale
    }

    pub fn to_rational_exact(&self) -> Option<RBig> {
        // Binary floats are dyadic rationals; useful when exact pipelines
        // receive float input that happens to be representable.
        let repr = self.0.repr();
        let sig = repr.significand().clone();
        let exp = repr.exponent();
        if exp >= 0 {
            let scale = IBig::from(UBig::ONE << exp as usize);
            Some(RBig::from(sig * scale))
        } else {
            let den = UBig::ONE << (-exp) as usize;
            Some(RBig::from_parts(sig, den))
        }
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({})", self.to_f64())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! real_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                Real(&self.0 $op &rhs.0)
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                Real(self.0 $op rhs.0)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                Real(self.0 $op &rhs.0)
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                Real(&self.0 $op rhs.0)
            }
        }
    };
}

real_binop!(Add, add, +);
real_binop!(Sub, sub, -);
real_binop!(Mul, mul, *);
real_binop!(Div, div, /);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-&self.0)
    }
}

/// Complex number over [`Real`].
#[derive(Clone, PartialEq)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Self {
        Complex { re, im }
    }

    pub fn zero(bits: usize) -> Self {
        Complex::new(Real::zero(bits), Real::zero(bits))
    }

    pub fn one(bits: usize) -> Self {
        Complex::new(Real::one(bits), Real::zero(bits))
    }

    pub fn from_real(re: Real) -> Self {
        let bits = re.bits();
        Complex::new(re, Real::zero(bits))
    }

    pub fn from_f64(re: f64, im: f64, bits: usize) -> Self {
        Complex::new(Real::from_f64(re, bits), Real::from_f64(im, bits))
    }

    pub fn from_c64(z: num_complex::Complex64, bits: usize) -> Self {
        Complex::from_f64(z.re, z.im, bits)
    }

    pub fn from_gauss(g: &GaussRational, bits: usize) -> Self {
        Complex::new(
            Real::from_rational(&g.re, bits),
            Real::from_rational(&g.im, bits),
        )
    }

    pub fn bits(&self) -> usize {
        self.re.bits().max(self.im.bits())
    }

    pub fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> Real {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> Real {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, r: &Real) -> Self {
        Complex::new(&self.re * r, &self.im * r)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl Add<&Complex> for &Complex {
    type Output = Complex;
    fn add(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&Complex> for &Complex {
    type Output = Complex;
    fn sub(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&Complex> for &Complex {
    type Output = Complex;
    fn mul(self, rhs: &Complex) -> Complex {
        Complex::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Div<&Complex> for &Complex {
    type Output = Complex;
    fn div(self, rhs: &Complex) -> Complex {
        let den = rhs.norm_sqr();
        Complex::new(
            (&self.re * &rhs.re + &self.im * &rhs.im) / &den,
            (&self.im * &rhs.re - &self.re * &rhs.im) / &den,
        )
    }
}

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-&self.re, -&self.im)
    }
}

/// Exact complex rational `re + im·i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussRational {
    pub re: RBig,
    pub im: RBig,
}

impl GaussRational {
    pub fn new(re: RBig, im: RBig) -> Self {
        GaussRational { re, im }
    }

    pub fn real(re: RBig) -> Self {
        GaussRational { re, im: RBig::ZERO }
    }

    pub fn i() -> Self {
        GaussRational::new(RBig::ZERO, RBig::ONE)
    }
}

/// Ring operations needed by [`crate::poly::Polynomial`].
pub trait Coeff: Clone + fmt::Debug + PartialEq {
    fn is_zero(&self) -> bool;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
}

impl Coeff for RBig {
    fn is_zero(&self) -> bool {
        RBig::is_zero(self)
    }
    fn zero_like(&self) -> Self {
        RBig::ZERO
    }
    fn one_like(&self) -> Self {
        RBig::ONE
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn conj(&self) -> Self {
        self.clone()
    }
}

impl Coeff for GaussRational {
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn zero_like(&self) -> Self {
        GaussRational::real(RBig::ZERO)
    }
    fn one_like(&self) -> Self {
        GaussRational::real(RBig::ONE)
    }
    fn add(&self, o: &Self) -> Self {
        GaussRational::new(&self.re + &o.re, &self.im + &o.im)
    }
    fn sub(&self, o: &Self) -> Self {
        GaussRational::new(&self.re - &o.re, &self.im - &o.im)
    }
    fn mul(&self, o: &Self) -> Self {
        GaussRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
    fn neg(&self) -> Self {
        GaussRational::new(-self.re.clone(), -self.im.clone())
    }
    fn conj(&self) -> Self {
        GaussRational::new(self.re.clone(), -self.im.clone())
    }
}

impl Coeff for Real {
    fn is_zero(&self) -> bool {
        Real::is_zero(self)
    }
    fn zero_like(&self) -> Self {
        Real::zero(self.bits())
    }
    fn one_like(&self) -> Self {
        Real::one(self.bits())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        self.clone()
    }
}

impl Coeff for Complex {
    fn is_zero(&self) -> bool {
        Complex::is_zero(self)
    }
    fn zero_like(&self) -> Self {
        Complex::zero(self.bits())
    }
    fn one_like(&self) -> Self {
        Complex::one(self.bits())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
}

/// Parses `"a+bi"`, `"a-bi"`, `"bi"`, `"a"` or `"i"` into a complex pair.
pub fn parse_complex_literal(s: &str) -> Option<(f64, f64)> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    if !t.ends_with('i') {
        return t.parse::<f64>().ok().filter(|v| v.is_finite()).map(|v| (v, 0.0));
    }
    let body = &t[..t.len() - 1];
    // Split at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        let c = bytes[k];
        if (c == b'+' || c == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let parse_im = |x: &str| -> Option<f64> {
        match x {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => x.parse::<f64>().ok(),
        }
    };
    let (re, im) = match split {
        Some(k) => (body[..k].parse::<f64>().ok()?, parse_im(&body[k..])?),
        None => (0.0, parse_im(body)?),
    };
    (re.is_finite() && im.is_finite()).then_some((re, im))
}

/// Converts a finite f64 to the exact dyadic rational it represents.
pub fn f64_to_rational(v: f64) -> Option<RBig> {
    if !v.is_finite() {
        return None;
    }
    Real::from_f64(v, 64).to_rational_exact()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_follows_wider_operand() {
        let a = Real::from_i64(1, 128);
        let b = Real::from_i64(3, 512);
        assert_eq!((&a / &b).bits(), 512);
    }

    #[test]
    fn decimal_round_trip() {
        let x = Real::from_i64(2, 256).sqrt();
        let s = x.to_decimal_string();
        let y = Real::parse_decimal(&s, 256).unwrap();
        assert!(x == y, "{s}");
    }

    #[test]
    fn rational_conversion() {
        let r = RBig::from_parts(IBig::from(-7), UBig::from(4u8));
        assert_eq!(Real::from_rational(&r, 64).to_f64(), -1.75);
        assert_eq!(Real::from_f64(-1.75, 64).to_rational_exact().unwrap(), r);
    }

    #[test]
    fn complex_division() {
        let i = Complex::from_f64(0.0, 1.0, 128);
        let one = Complex::one(128);
        let q = &one / &i;
        assert_eq!(q.to_c64(), num_complex::Complex64::new(0.0, -1.0));
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex_literal("0+1i"), Some((0.0, 1.0)));
        assert_eq!(parse_complex_literal("-2.5-3i"), Some((-2.5, -3.0)));
        assert_eq!(parse_complex_literal("i"), Some((0.0, 1.0)));
        assert_eq!(parse_complex_literal("-i"), Some((0.0, -1.0)));
        assert_eq!(parse_complex_literal("1e-3+2e+1i"), Some((1e-3, 20.0)));
        assert_eq!(parse_complex_literal("4"), Some((4.0, 0.0)));
        assert_eq!(parse_complex_literal("x+i"), None);
        assert_eq!(parse_complex_literal(""), None);
    }
}

/// Complex number as it appears in JSON: `{"re": .., "im": ..}`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WireComplex {
    pub re: f64,
    pub im: f64,
}

impl WireComplex {
    pub fn new(re: f64, im: f64) -> Self {
        WireComplex { re, im }
    }

    pub fn to_complex(self, bits: usize) -> Complex {
        Complex::from_f64(self.re, self.im, bits)
    }
}

impl From<&Complex> for WireComplex {
    fn from(c: &Complex) -> Self {
        WireComplex { re: c.re.to_f64(), im: c.im.to_f64() }
    }
}

impl From<num_complex::Complex64> for WireComplex {
    fn from(c: num_complex::Complex64) -> Self {
        WireComplex { re: c.re, im: c.im }
    }
}
