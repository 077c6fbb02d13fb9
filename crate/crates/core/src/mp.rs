//! Configurable-precision complex floats.
//!
//! Non-integer constants created through [`Scalar::from_rational`] use the
//! thread-local working precision; set it with [`with_precision`] around any
//! generic computation. Values that already carry a precision keep it: binary
//! operations take the larger of the two operand precisions.

use std::cell::Cell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use dashu_float::round::mode::HalfEven;
use dashu_float::ops::Abs;
use dashu_float::FBig;
use dashu_int::ops::{BitTest, UnsignedAbs};
use dashu_int::{IBig, Sign as DSign, UBig};
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{binomial, Scalar, Transcendental};

pub type MpFloat = FBig<HalfEven, 2>;

pub const DEFAULT_BITS: usize = 128;

thread_local! {
    static WORKING_BITS: Cell<usize> = const { Cell::new(DEFAULT_BITS) };
}

pub fn working_precision() -> usize {
    WORKING_BITS.with(|b| b.get())
}

/// Restores the previous working precision on drop.
pub struct PrecisionGuard {
    previous: usize,
}

impl Drop for PrecisionGuard {
    fn drop(&mut self) {
        WORKING_BITS.with(|b| b.set(self.previous));
    }
}

pub fn set_working_precision(bits: usize) -> PrecisionGuard {
    assert!(bits >= 16, "precision below 16 bits");
    let previous = WORKING_BITS.with(|b| b.replace(bits));
    PrecisionGuard { previous }
}

pub fn with_precision<T>(bits: usize, f: impl FnOnce() -> T) -> T {
    let _guard = set_working_precision(bits);
    f()
}

pub fn bigint_to_ibig(v: &BigInt) -> IBig {
    let (sign, bytes) = v.to_bytes_le();
    let magnitude = UBig::from_le_bytes(&bytes);
    match sign {
        Sign::Minus => IBig::from_parts(DSign::Negative, magnitude),
        _ => IBig::from_parts(DSign::Positive, magnitude),
    }
}

pub fn float_from_bigint(v: &BigInt, bits: usize) -> MpFloat {
    MpFloat::from(bigint_to_ibig(v)).with_precision(bits).value()
}

/// Correctly rounded (half-even, single rounding) to `bits`.
pub fn float_from_rational(r: &BigRational, bits: usize) -> MpFloat {
    if r.is_zero() {
        return MpFloat::ZERO.with_precision(bits).value();
    }
    let (n, d) = (r.numer().magnitude(), r.denom().magnitude());
    // Scale so the integer quotient carries at least `bits + 1` bits.
    let shift = bits as i64 + 2 + d.bits() as i64 - n.bits() as i64;
    let (q, rem) = if shift >= 0 {
        (n << shift as usize).div_rem(d)
    } else {
        n.div_rem(&(d << (-shift) as usize))
    };
    let extra = q.bits() as usize - bits;
    let mut kept = &q >> extra;
    let half = BigUint::one() << (extra - 1);
    let dropped = &q - (&kept << extra);
    let round_up = dropped > half || (dropped == half && (!rem.is_zero() || kept.bit(0)));
    if round_up {
        kept += 1u32;
    }
    let signed = BigInt::from_biguint(r.numer().sign(), kept);
    MpFloat::from_parts(bigint_to_ibig(&signed), extra as isize - shift as isize)
        .with_precision(bits)
        .value()
}

pub fn float_from_f64(v: f64, bits: usize) -> MpFloat {
    MpFloat::try_from(v)
        .map(|f| f.with_precision(bits).value())
        .unwrap_or(MpFloat::ZERO)
}

pub fn float_to_f64(x: &MpFloat) -> f64 {
    x.to_f64().value()
}

pub fn ibig_to_bigint(v: &IBig) -> BigInt {
    let sign = if *v < IBig::ZERO { Sign::Minus } else { Sign::Plus };
    BigInt::from_bytes_le(sign, &v.unsigned_abs().to_le_bytes())
}

/// The exact value as a rational.
pub fn float_to_rational(x: &MpFloat) -> BigRational {
    let repr = x.repr();
    let sig = ibig_to_bigint(repr.significand());
    let e = repr.exponent();
    if e >= 0 {
        BigRational::from_integer(sig << e as usize)
    } else {
        BigRational::new(sig, BigInt::one() << (-e) as usize)
    }
}

/// Decimal text with enough significant digits that parsing it back and
/// rounding to the same precision recovers `x` exactly.
pub fn format_float(x: &MpFloat) -> String {
    if x.repr().is_zero() {
        return "0".to_string();
    }
    let bits = x.precision().max(53);
    let digits = (bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
    format_decimal(&float_to_rational(x), digits)
}

/// `r` rounded half-even to `digits` significant decimal digits; plain
/// notation for moderate exponents, `d.ddde±k` otherwise.
fn format_decimal(r: &BigRational, digits: usize) -> String {
    let ten = BigInt::from(10);
    let a = r.abs();
    // Decimal exponent estimate, corrected below so that 10^(k-1) <= a < 10^k.
    let est = (a.numer().bits() as f64 - a.denom().bits() as f64) * std::f64::consts::LOG10_2;
    let mut k = est.floor() as i64;
    let pow = |e: i64| -> BigRational {
        if e >= 0 {
            BigRational::from_integer(num_traits::pow(ten.clone(), e as usize))
        } else {
            BigRational::new(BigInt::one(), num_traits::pow(ten.clone(), (-e) as usize))
        }
    };
    while a >= pow(k) {
        k += 1;
    }
    while a < pow(k - 1) {
        k -= 1;
    }
    let scaled = &a * pow(digits as i64 - k);
    let (mut m, frac) = (scaled.trunc().to_integer(), scaled.fract());
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if frac > half || (frac == half && m.is_odd()) {
        m += 1;
    }
    let mut text = m.to_string();
    if text.len() > digits {
        // Rounded up to the next power of ten.
        text.pop();
        k += 1;
    }
    let trimmed = text.trim_end_matches('0');
    let sign = if r.is_negative() { "-" } else { "" };
    let body = if (-6..=21).contains(&k) {
        if k <= 0 {
            format!("0.{}{}", "0".repeat((-k) as usize), trimmed)
        } else if trimmed.len() as i64 <= k {
            format!("{}{}", trimmed, "0".repeat(k as usize - trimmed.len()))
        } else {
            format!("{}.{}", &trimmed[..k as usize], &trimmed[k as usize..])
        }
    } else {
        let (head, tail) = trimmed.split_at(1);
        let dot = if tail.is_empty() { String::new() } else { format!(".{tail}") };
        format!("{head}{dot}e{}", k - 1)
    };
    format!("{sign}{body}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpComplex {
    pub re: MpFloat,
    pub im: MpFloat,
}

impl MpComplex {
    pub fn new(re: MpFloat, im: MpFloat) -> Self {
        Self { re, im }
    }

    pub fn from_real(re: MpFloat) -> Self {
        Self { re, im: MpFloat::ZERO }
    }

    pub fn from_rational_bits(r: &BigRational, bits: usize) -> Self {
        Self::from_real(float_from_rational(r, bits))
    }

    pub fn from_complex64_bits(z: Complex64, bits: usize) -> Self {
        Self::new(float_from_f64(z.re, bits), float_from_f64(z.im, bits))
    }

    pub fn with_precision(self, bits: usize) -> Self {
        Self {
            re: self.re.with_precision(bits).value(),
            im: self.im.with_precision(bits).value(),
        }
    }

    pub fn norm_sqr(&self) -> MpFloat {
        self.re.sqr() + self.im.sqr()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn scale(&self, s: &MpFloat) -> Self {
        Self { re: &self.re * s, im: &self.im * s }
    }

    /// log2 |z| to double precision, free of overflow.
    pub fn log2_abs(&self) -> f64 {
        log2_magnitude(&self.norm_sqr()) / 2.0
    }

    pub fn precision(&self) -> usize {
        self.re.precision().max(self.im.precision())
    }
}

/// log2 |x| to double precision for any exponent; `-inf` at zero.
pub fn log2_magnitude(x: &MpFloat) -> f64 {
    let repr = x.repr();
    if repr.is_zero() {
        return f64::NEG_INFINITY;
    }
    let mut sig = repr.significand().clone();
    let mut exp = repr.exponent() as i64;
    let len = sig.clone().unsigned_abs().bit_len();
    if len > 60 {
        let drop = len - 60;
        sig >>= drop;
        exp += drop as i64;
    }
    sig.to_f64().value().abs().log2() + exp as f64
}

/// Divisors must carry a finite precision.
fn limited(x: MpFloat) -> MpFloat {
    if x.precision() == 0 {
        x.with_precision(working_precision()).value()
    } else {
        x
    }
}

/// Exact integer with unlimited precision; combines losslessly with others.
pub fn exact_integer(v: &BigInt) -> MpFloat {
    MpFloat::from(bigint_to_ibig(v)).with_precision(0).value()
}

impl Add for MpComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl Sub for MpComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl Mul for MpComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.im.repr().is_zero() && rhs.im.repr().is_zero() {
            return Self::from_real(self.re * rhs.re);
        }
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        Self { re, im }
    }
}

impl Div for MpComplex {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        if self.im.repr().is_zero() && rhs.im.repr().is_zero() {
            return Self::from_real(self.re / limited(rhs.re));
        }
        let denom = limited(rhs.norm_sqr());
        let re = &self.re * &rhs.re + &self.im * &rhs.im;
        let im = &self.im * &rhs.re - &self.re * &rhs.im;
        Self { re: re / &denom, im: im / &denom }
    }
}

impl Neg for MpComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

impl Zero for MpComplex {
    fn zero() -> Self {
        Self { re: MpFloat::ZERO, im: MpFloat::ZERO }
    }
    fn is_zero(&self) -> bool {
        self.re.repr().is_zero() && self.im.repr().is_zero()
    }
}

impl One for MpComplex {
    fn one() -> Self {
        Self { re: MpFloat::ONE, im: MpFloat::ZERO }
    }
}

impl fmt::Display for MpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl Scalar for MpComplex {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        if r.is_integer() {
            Self::from_real(exact_integer(r.numer()))
        } else {
            Self::from_rational_bits(r, working_precision())
        }
    }

    fn from_complex64(z: Complex64) -> Self {
        Self::from_complex64_bits(z, working_precision())
    }

    fn magnitude(&self) -> f64 {
        let l = self.log2_abs();
        if l == f64::NEG_INFINITY {
            0.0
        } else if l.abs() < 1000.0 {
            self.to_complex64().norm()
        } else {
            2f64.powf(l)
        }
    }

    fn to_complex64(&self) -> Complex64 {
        Complex64::new(float_to_f64(&self.re), float_to_f64(&self.im))
    }

    fn rel_tolerance() -> f64 {
        2f64.powi(-(working_precision() as i32) / 2)
    }

    fn text_parts(&self) -> (String, Option<String>) {
        (format_float(&self.re), (!self.im.repr().is_zero()).then(|| format_float(&self.im)))
    }

    /// Decimal text is read exactly, then rounded once to the working precision.
    fn parse_parts(re: &str, im: Option<&str>) -> Result<Self> {
        let bits = working_precision();
        let re = float_from_rational(&crate::scalar::parse_rational(re)?, bits);
        let im = match im {
            Some(t) => float_from_rational(&crate::scalar::parse_rational(t)?, bits),
            None => MpFloat::ZERO,
        };
        Ok(Self::new(re, im))
    }
}

impl Transcendental for MpComplex {
    /// Real arguments only; no multiprecision trigonometry is provided.
    fn exp(&self) -> Result<Self> {
        if !self.im.repr().is_zero() {
            return Err(Error::Unsupported("multiprecision exp of a non-real argument".into()));
        }
        let bits = self.precision().max(working_precision());
        Ok(Self::from_real(limited(self.re.clone()).with_precision(bits + 16).value().exp().with_precision(bits).value()))
    }
}

/// pi via Machin's formula.
pub fn pi(bits: usize) -> MpFloat {
    let work = bits + 16;
    let atan_inv = |m: u64| -> MpFloat {
        let m_f = float_from_bigint(&BigInt::from(m), work);
        let m2 = m_f.sqr();
        let mut power = MpFloat::ONE.with_precision(work).value() / &m_f;
        let mut sum = power.clone();
        let eps = float_from_f64(2f64.powi(-(work as i32)), work);
        let mut k = 1u64;
        loop {
            power /= &m2;
            let term = &power / float_from_bigint(&BigInt::from(2 * k + 1), work);
            if term < eps {
                break;
            }
            if k % 2 == 1 {
                sum -= term;
            } else {
                sum += term;
            }
            k += 1;
        }
        sum
    };
    let four = float_from_bigint(&BigInt::from(4), work);
    let quarter = &four * atan_inv(5) - atan_inv(239);
    (quarter * four).with_precision(bits).value()
}

/// Even-index Bernoulli numbers B_0, B_2, B_4, ...
fn bernoulli_even() -> &'static [BigRational] {
    static TABLE: OnceLock<Vec<BigRational>> = OnceLock::new();
    TABLE.get_or_init(|| {
        const MAX: usize = 200;
        let mut b: Vec<BigRational> = Vec::with_capacity(MAX + 1);
        b.push(BigRational::one());
        for m in 1..=MAX {
            // sum_{k<m} C(m+1,k) B_k = -(m+1) B_m
            let mut acc = BigRational::zero();
            for (k, bk) in b.iter().enumerate() {
                if !bk.is_zero() {
                    acc += bk * BigRational::from_integer(binomial(m as u64 + 1, k as u64));
                }
            }
            b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
        }
        b.into_iter().step_by(2).collect()
    })
}

/// log Gamma(x) for real x > 0 by upward shift and the Stirling series.
pub fn ln_gamma(x: &MpFloat, bits: usize) -> Result<MpFloat> {
    if *x <= MpFloat::ZERO {
        return Err(Error::NonpositiveArgument(float_to_f64(x)));
    }
    let work = bits + 32;
    if work > 2400 {
        return Err(Error::Unsupported(format!("real log-gamma above 2400 bits (requested {bits})")));
    }
    // 100 Stirling terms reach 2^-work once z exceeds 12 * 2^(work/200).
    let threshold = (0.25 * work as f64 + 12.0).max(12.0 * 2f64.powf(work as f64 / 200.0)).ceil();
    let mut z = x.clone().with_precision(work).value();
    let mut shift_product = MpFloat::ONE.with_precision(work).value();
    while float_to_f64(&z) < threshold {
        shift_product *= &z;
        z += MpFloat::ONE;
    }
    let half = float_from_rational(&BigRational::new(1.into(), 2.into()), work);
    let two_pi = pi(work) * float_from_bigint(&BigInt::from(2), work);
    let mut result = (&z - &half) * z.ln() - &z + &half * two_pi.ln();
    let eps = float_from_f64(2f64.powi(-(work as i32) - 4), work);
    let z2 = z.sqr();
    let mut zpow = z.clone();
    let table = bernoulli_even();
    for (k, b2k) in table.iter().enumerate().skip(1) {
        let k = k as i64;
        let denom = BigRational::from_integer(BigInt::from(2 * k * (2 * k - 1)));
        let coeff = float_from_rational(&(b2k / denom), work);
        let term = coeff / &zpow;
        let small = term.clone().abs() < eps;
        result += term;
        if small {
            break;
        }
        zpow *= &z2;
    }
    result -= shift_product.ln();
    Ok(result.with_precision(bits).value())
}
