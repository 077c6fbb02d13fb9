//! Formal expressions in three commuting symbols: `x`, the family symbol `q̂`
//! (whose powers evaluate to `φ_b(y)`) and the gamma symbol `Ĵ` (whose powers
//! evaluate to the weights `C_e(R)`).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::families::{phi_values, PhiFamily};
use crate::matfun::{GammaWeights, Mat};
use crate::scalar::{format_rational, Scalar};

pub const DEFAULT_DEGREE_CAP: u32 = 64;

/// Exponents of `x`, `q̂`, `Ĵ`.
pub type Exponents = (u32, u32, u32);

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct UmbralExpr {
    terms: BTreeMap<Exponents, BigRational>,
}

impl UmbralExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(BigRational::one(), (0, 0, 0))
    }

    pub fn monomial(coeff: BigRational, exps: Exponents) -> Self {
        let mut e = Self::zero();
        e.accumulate(exps, coeff);
        e
    }

    pub fn x() -> Self {
        Self::monomial(BigRational::one(), (1, 0, 0))
    }

    pub fn q() -> Self {
        Self::monomial(BigRational::one(), (0, 1, 0))
    }

    pub fn j() -> Self {
        Self::monomial(BigRational::one(), (0, 0, 1))
    }

    /// `x + q̂ − Ĵ`, the raising multiplier.
    pub fn shift_base() -> Self {
        &(&Self::x() + &Self::q()) - &Self::j()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: Exponents) -> BigRational {
        self.terms.get(&exps).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Largest total degree `a + b + e` among stored terms.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(a, b, e)| a + b + e).max().unwrap_or(0)
    }

    fn accumulate(&mut self, exps: Exponents, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(exps).or_insert_with(BigRational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero();
        for (&k, v) in &self.terms {
            out.accumulate(k, v * c);
        }
        out
    }
}

impl Add for &UmbralExpr {
    type Output = UmbralExpr;
    fn add(self, rhs: &UmbralExpr) -> UmbralExpr {
        let mut out = self.clone();
        for (&k, v) in &rhs.terms {
            out.accumulate(k, v.clone());
        }
        out
    }
}

impl Sub for &UmbralExpr {
    type Output = UmbralExpr;
    fn sub(self, rhs: &UmbralExpr) -> UmbralExpr {
        let mut out = self.clone();
        for (&k, v) in &rhs.terms {
            out.accumulate(k, -v.clone());
        }
        out
    }
}

impl Neg for &UmbralExpr {
    type Output = UmbralExpr;
    fn neg(self) -> UmbralExpr {
        self.scale(&-BigRational::one())
    }
}

impl Mul for &UmbralExpr {
    type Output = UmbralExpr;
    fn mul(self, rhs: &UmbralExpr) -> UmbralExpr {
        umul(self, rhs)
    }
}

/// Distributive product; exponents add componentwise.
pub fn umul(a: &UmbralExpr, b: &UmbralExpr) -> UmbralExpr {
    let mut out = UmbralExpr::zero();
    for (&(a1, b1, e1), c1) in &a.terms {
        for (&(a2, b2, e2), c2) in &b.terms {
            out.accumulate((a1 + a2, b1 + b2, e1 + e2), c1 * c2);
        }
    }
    out
}

pub fn upow(base: &UmbralExpr, n: u32) -> Result<UmbralExpr> {
    upow_capped(base, n, DEFAULT_DEGREE_CAP)
}

pub fn upow_capped(base: &UmbralExpr, n: u32, cap: u32) -> Result<UmbralExpr> {
    if n > cap {
        return Err(Error::DegreeCapExceeded { degree: n, cap });
    }
    let mut out = UmbralExpr::one();
    for _ in 0..n {
        out = umul(&out, base);
    }
    Ok(out)
}

/// `(x + q̂ − Ĵ)ⁿ`, memoised process-wide (read-mostly, single writer).
pub fn shift_power(n: u32) -> Result<Arc<UmbralExpr>> {
    static TABLE: OnceLock<RwLock<Vec<Arc<UmbralExpr>>>> = OnceLock::new();
    if n > DEFAULT_DEGREE_CAP {
        return Err(Error::DegreeCapExceeded { degree: n, cap: DEFAULT_DEGREE_CAP });
    }
    let table = TABLE.get_or_init(|| RwLock::new(vec![Arc::new(UmbralExpr::one())]));
    if let Some(e) = table.read().expect("umbral table poisoned").get(n as usize) {
        return Ok(e.clone());
    }
    let mut guard = table.write().expect("umbral table poisoned");
    let base = UmbralExpr::shift_base();
    while guard.len() <= n as usize {
        let next = umul(guard.last().expect("seeded"), &base);
        guard.push(Arc::new(next));
    }
    Ok(guard[n as usize].clone())
}

/// The raising operator: multiply by `x + q̂ − Ĵ`.
pub fn apply_multiplicative(e: &UmbralExpr) -> Result<UmbralExpr> {
    let degree = e.degree() + 1;
    if degree > DEFAULT_DEGREE_CAP {
        return Err(Error::DegreeCapExceeded { degree, cap: DEFAULT_DEGREE_CAP });
    }
    Ok(umul(e, &UmbralExpr::shift_base()))
}

/// The lowering operator: formal `∂/∂x`.
pub fn apply_derivative_x(e: &UmbralExpr) -> UmbralExpr {
    let mut out = UmbralExpr::zero();
    for (&(a, b, j), c) in &e.terms {
        if a > 0 {
            out.accumulate((a - 1, b, j), c * BigRational::from_integer(BigInt::from(a)));
        }
    }
    out
}

fn max_exponents(e: &UmbralExpr) -> Exponents {
    e.terms.keys().fold((0, 0, 0), |(ma, mb, me), &(a, b, j)| (ma.max(a), mb.max(b), me.max(j)))
}

/// Vacuum evaluation: `x^a q̂^b Ĵ^e ↦ x^a·φ_b(y)·C_e(R)`.
pub fn evaluate<S: Scalar>(
    e: &UmbralExpr,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
    x: &S,
    y: &S,
) -> Result<Mat<S>> {
    let dim = weights.dim();
    if e.is_empty() {
        return Ok(Mat::zeros(dim));
    }
    let (ma, mb, me) = max_exponents(e);
    let xs = powers(x, ma);
    let phi = phi_values(fam, mb as usize, y)?;
    let c = weights.weights(me as usize)?;
    // Collapse the scalar part per Ĵ exponent before touching matrices.
    let mut per_j: Vec<S> = vec![S::zero(); me as usize + 1];
    for (&(a, b, j), coeff) in &e.terms {
        let phi_b = &phi[b as usize];
        if phi_b.is_zero() {
            continue;
        }
        let term = S::from_rational(coeff) * xs[a as usize].clone() * phi_b.clone();
        per_j[j as usize] = per_j[j as usize].clone() + term;
    }
    let mut out = Mat::zeros(dim);
    for (j, s) in per_j.iter().enumerate() {
        if !s.is_zero() {
            out = &out + &c[j].scale(s);
        }
    }
    Ok(out)
}

/// The family functional alone: `x^a q̂^b ↦ x^a·φ_b(y)`. Expressions
/// containing `Ĵ` are rejected.
pub fn evaluate_xi<S: Scalar>(e: &UmbralExpr, fam: &PhiFamily, x: &S, y: &S) -> Result<S> {
    if e.terms.keys().any(|&(_, _, j)| j > 0) {
        return Err(Error::InvalidInput("family functional applied to an expression containing J".into()));
    }
    let (ma, mb, _) = max_exponents(e);
    let xs = powers(x, ma);
    let phi = phi_values(fam, mb as usize, y)?;
    Ok(e.terms.iter().fold(S::zero(), |acc, (&(a, b, _), c)| {
        acc + S::from_rational(c) * xs[a as usize].clone() * phi[b as usize].clone()
    }))
}

fn powers<S: Scalar>(x: &S, upto: u32) -> Vec<S> {
    let mut out = Vec::with_capacity(upto as usize + 1);
    out.push(S::one());
    for k in 1..=upto as usize {
        out.push(out[k - 1].clone() * x.clone());
    }
    out
}

/// One term per line, `coeff x^a q^b J^e`, in lexicographic exponent order.
impl fmt::Display for UmbralExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (&(a, b, e), c) in &self.terms {
            writeln!(f, "{} x^{a} q^{b} J^{e}", format_rational(c))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::ExactWeights;

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn exponent_law() {
        let j2 = upow(&UmbralExpr::j(), 2).unwrap();
        let j3 = upow(&UmbralExpr::j(), 3).unwrap();
        let prod = umul(&j2, &j3);
        assert_eq!(prod.len(), 1);
        assert_eq!(prod.coeff((0, 0, 5)), int(1));
    }

    #[test]
    fn square_of_shift_base() {
        let s2 = upow(&UmbralExpr::shift_base(), 2).unwrap();
        assert_eq!(s2.len(), 6);
        assert_eq!(s2.coeff((2, 0, 0)), int(1));
        assert_eq!(s2.coeff((0, 2, 0)), int(1));
        assert_eq!(s2.coeff((0, 0, 2)), int(1));
        assert_eq!(s2.coeff((1, 1, 0)), int(2));
        assert_eq!(s2.coeff((1, 0, 1)), int(-2));
        assert_eq!(s2.coeff((0, 1, 1)), int(-2));
        let mixed = umul(&(&UmbralExpr::x() + &UmbralExpr::q()), &(&UmbralExpr::x() - &UmbralExpr::j()));
        assert_eq!(mixed.len(), 4);
    }

    #[test]
    fn degree_cap() {
        assert!(upow(&UmbralExpr::shift_base(), 64).is_ok());
        assert_eq!(
            upow(&UmbralExpr::shift_base(), 65),
            Err(Error::DegreeCapExceeded { degree: 65, cap: 64 })
        );
        assert_eq!(upow(&UmbralExpr::x(), 0).unwrap(), UmbralExpr::one());
        assert_eq!(*shift_power(7).unwrap(), upow(&UmbralExpr::shift_base(), 7).unwrap());
        assert!(shift_power(65).is_err());
    }

    #[test]
    fn derivative() {
        let x2 = upow(&UmbralExpr::x(), 2).unwrap();
        assert_eq!(apply_derivative_x(&x2), UmbralExpr::x().scale(&int(2)));
        assert!(apply_derivative_x(&umul(&UmbralExpr::q(), &UmbralExpr::j())).is_empty());
    }

    #[test]
    fn vacuum_evaluation() {
        let w = ExactWeights::new(1).unwrap();
        let one = int(1);
        let v = evaluate::<BigRational>(&UmbralExpr::one(), &w, &PhiFamily::TruncatedExp, &one, &one).unwrap();
        assert_eq!(v.as_scalar().unwrap(), &BigRational::new(1.into(), 2.into()));
        let q2 = upow(&UmbralExpr::q(), 2).unwrap();
        assert_eq!(evaluate_xi(&q2, &PhiFamily::TruncatedExp, &one, &int(3)).unwrap(), int(18));
        let s1 = upow(&UmbralExpr::shift_base(), 1).unwrap();
        let v = evaluate::<BigRational>(&s1, &w, &PhiFamily::TruncatedExp, &one, &one).unwrap();
        assert_eq!(v.as_scalar().unwrap(), &BigRational::new(11.into(), 12.into()));
        assert!(evaluate_xi(&s1, &PhiFamily::TruncatedExp, &one, &one).is_err());
    }

    #[test]
    fn dump_format() {
        let s2 = upow(&UmbralExpr::shift_base(), 2).unwrap();
        let expected = "\
1 x^0 q^0 J^2
-2 x^0 q^1 J^1
1 x^0 q^2 J^0
-2 x^1 q^0 J^1
2 x^1 q^1 J^0
1 x^2 q^0 J^0
";
        assert_eq!(s2.to_string(), expected);
    }
}
