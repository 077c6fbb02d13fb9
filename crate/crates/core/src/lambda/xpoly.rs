use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::matfun::Mat;
use crate::scalar::Scalar;

/// Polynomial in `x` with matrix coefficients; `coeffs[k]` multiplies `x^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct XPoly<S> {
    coeffs: Vec<Mat<S>>,
}

impl<S: Scalar> XPoly<S> {
    pub fn new(coeffs: Vec<Mat<S>>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::InvalidInput("polynomial needs at least one coefficient".into()));
        };
        let dim = first.dim();
        if let Some(bad) = coeffs.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
        }
        Ok(Self { coeffs })
    }

    /// Nominal degree (number of coefficients minus one).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].dim()
    }

    pub fn coeffs(&self) -> &[Mat<S>] {
        &self.coeffs
    }

    pub fn leading(&self) -> &Mat<S> {
        &self.coeffs[self.degree()]
    }

    /// Entries of a 1×1-coefficient polynomial.
    pub fn scalar_coeffs(&self) -> Option<Vec<S>> {
        self.coeffs.iter().map(|c| c.as_scalar().cloned()).collect()
    }

    pub fn eval(&self, x: &S) -> Mat<S> {
        let mut acc = Mat::zeros(self.dim());
        for c in self.coeffs.iter().rev() {
            acc = &acc.scale(x) + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self { coeffs: vec![Mat::zeros(self.dim())] };
        }
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c.scale(&S::from_i64(k as i64))).collect();
        Self { coeffs }
    }

    pub fn nth_derivative(&self, j: usize) -> Self {
        (0..j).fold(self.clone(), |p, _| p.derivative())
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = vec![Mat::zeros(self.dim())];
        for (k, c) in self.coeffs.iter().enumerate() {
            let inv = S::from_rational(&BigRational::new(BigInt::from(1), BigInt::from(k + 1)));
            coeffs.push(c.scale(&inv));
        }
        Self { coeffs }
    }

    pub fn scale(&self, s: &S) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64) -> BigRational {
        BigRational::from_integer(p.into())
    }

    fn poly(cs: &[i64]) -> XPoly<BigRational> {
        XPoly::new(cs.iter().map(|&c| Mat::scalar(q(c))).collect()).unwrap()
    }

    #[test]
    fn horner_and_calculus() {
        let p = poly(&[1, -3, 2]);
        assert_eq!(p.eval(&q(2)).as_scalar().unwrap(), &q(3));
        assert_eq!(p.derivative(), poly(&[-3, 4]));
        assert_eq!(p.nth_derivative(3), poly(&[0]));
        assert_eq!(p.antiderivative().derivative(), p);
    }
}
