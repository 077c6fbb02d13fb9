//! The scalar tower shared by every construction.
//!
//! Three instantiations are provided: exact rationals ([`BigRational`], and
//! [`Complex<BigRational>`] for the complex extension), hardware floats
//! ([`Complex64`]) and configurable-precision floats ([`crate::mp::MpComplex`]).

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Field-like numeric contract used by the generic constructions.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    /// True when arithmetic is exact; identity checks then demand zero residuals.
    const EXACT: bool;

    fn from_rational(r: &BigRational) -> Self;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    fn from_bigint(v: &BigInt) -> Self {
        Self::from_rational(&BigRational::from_integer(v.clone()))
    }

    fn from_complex64(z: Complex64) -> Self;

    /// Modulus as a hardware float (may saturate to infinity).
    fn magnitude(&self) -> f64;

    fn to_complex64(&self) -> Complex64;

    /// Relative tolerance used by identity checks in this mode.
    fn rel_tolerance() -> f64;

    /// Deterministic text of the real part and, when nonzero, the imaginary
    /// part: `p/q` for rationals, round-trip decimals for floats.
    fn text_parts(&self) -> (String, Option<String>);

    /// Inverse of [`Scalar::text_parts`].
    fn parse_parts(re: &str, im: Option<&str>) -> Result<Self>;

    /// `re`, or `re±imi` when the imaginary part is nonzero.
    fn to_text(&self) -> String {
        match self.text_parts() {
            (re, None) => re,
            (re, Some(im)) if im.starts_with('-') => format!("{re}{im}i"),
            (re, Some(im)) => format!("{re}+{im}i"),
        }
    }
}

/// Scalars with an exponential, for generating-function checks.
pub trait Transcendental: Scalar {
    fn exp(&self) -> Result<Self>;
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn from_complex64(z: Complex64) -> Self {
        BigRational::from_float(z.re).unwrap_or_else(BigRational::zero)
    }

    fn magnitude(&self) -> f64 {
        rational_to_f64(self).abs()
    }

    fn to_complex64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }

    fn rel_tolerance() -> f64 {
        0.0
    }

    fn text_parts(&self) -> (String, Option<String>) {
        (format_rational(self), None)
    }

    fn parse_parts(re: &str, im: Option<&str>) -> Result<Self> {
        match im.map(parse_rational).transpose()? {
            Some(v) if !v.is_zero() => Err(Error::InvalidInput(format!("nonzero imaginary part '{}' for a real scalar", im.unwrap_or("")))),
            _ => parse_rational(re),
        }
    }
}

impl Scalar for Complex<BigRational> {
    const EXACT: bool = true;

    fn from_rational(r: &BigRational) -> Self {
        Complex::new(r.clone(), BigRational::zero())
    }

    fn from_complex64(z: Complex64) -> Self {
        Complex::new(
            BigRational::from_float(z.re).unwrap_or_else(BigRational::zero),
            BigRational::from_float(z.im).unwrap_or_else(BigRational::zero),
        )
    }

    fn magnitude(&self) -> f64 {
        self.to_complex64().norm()
    }

    fn to_complex64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    fn rel_tolerance() -> f64 {
        0.0
    }

    fn text_parts(&self) -> (String, Option<String>) {
        (format_rational(&self.re), (!self.im.is_zero()).then(|| format_rational(&self.im)))
    }

    fn parse_parts(re: &str, im: Option<&str>) -> Result<Self> {
        Ok(Complex::new(parse_rational(re)?, im.map(parse_rational).transpose()?.unwrap_or_else(BigRational::zero)))
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(rational_to_f64(r), 0.0)
    }

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn from_complex64(z: Complex64) -> Self {
        z
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn to_complex64(&self) -> Complex64 {
        *self
    }

    fn rel_tolerance() -> f64 {
        1e-10
    }

    fn text_parts(&self) -> (String, Option<String>) {
        (format!("{:?}", self.re), (self.im != 0.0).then(|| format!("{:?}", self.im)))
    }

    fn parse_parts(re: &str, im: Option<&str>) -> Result<Self> {
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("cannot parse '{t}' as a float")));
        Ok(Complex64::new(parse(re)?, im.map(parse).transpose()?.unwrap_or(0.0)))
    }
}

impl Transcendental for Complex64 {
    fn exp(&self) -> Result<Self> {
        Ok(Complex64::exp(*self))
    }
}

/// Correctly scaled conversion; `BigRational::to_f64` overflows on large
/// numerators even when the quotient is representable.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() && (v != 0.0 || r.is_zero()) {
            return v;
        }
    }
    let num_bits = r.numer().bits() as i64;
    let den_bits = r.denom().bits() as i64;
    let shift = num_bits - den_bits - 60;
    let scaled = if shift >= 0 {
        r.numer() / (r.denom() << shift as usize)
    } else {
        (r.numer() << (-shift) as usize) / r.denom()
    };
    let mantissa = scaled.to_f64().unwrap_or(0.0);
    mantissa * 2f64.powi(shift.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
}

pub fn pow_u<S: Scalar>(base: &S, exp: u32) -> S {
    let mut result = S::one();
    let mut acc = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result = result * acc.clone();
        }
        e >>= 1;
        if e > 0 {
            acc = acc.clone() * acc;
        }
    }
    result
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Rows 0..=n of Pascal's triangle, converted once into the target scalar.
pub fn binomial_table<S: Scalar>(n: usize) -> Vec<Vec<S>> {
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let mut row = vec![BigInt::one(); m + 1];
        for k in 1..m {
            row[k] = &rows[m - 1][k - 1] + &rows[m - 1][k];
        }
        rows.push(row);
    }
    rows.iter()
        .map(|row| row.iter().map(S::from_bigint).collect())
        .collect()
}

pub fn signed_unit<S: Scalar>(j: usize) -> S {
    if j.is_multiple_of(2) {
        S::one()
    } else {
        -S::one()
    }
}

/// Parses `p/q`, integers, and decimals (with optional exponent) exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::InvalidInput(format!("cannot parse '{text}' as a rational"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::InvalidInput(format!("zero denominator in '{text}'")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut numer = BigInt::parse_bytes(all.as_bytes(), 10).unwrap_or_default();
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// `p/q` text form, or `p` for integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn as_small_integer(r: &BigRational) -> Option<i64> {
    if r.is_integer() {
        r.numer().to_i64()
    } else {
        None
    }
}
