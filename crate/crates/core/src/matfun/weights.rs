use std::collections::HashMap;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use super::eigen::{check_positive_stable, eig_decompose, EigSystem, RECONSTRUCTION_TOL};
use super::gamma::complex_log_gamma;
use super::matrix::{CMatrix, Mat};
use crate::error::{Error, Result};
use crate::mp::{self, MpComplex};
use crate::scalar::{factorial, Scalar};

/// Source of the gamma-ratio weights `C_j(R) = Γ(R+(j+1)I)·Γ(2R+(2j+1)I)⁻¹`.
pub trait GammaWeights<S: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn weight(&self, j: usize) -> Result<Mat<S>>;

    /// `C_0 … C_upto`.
    fn weights(&self, upto: usize) -> Result<Vec<Mat<S>>> {
        (0..=upto).map(|j| self.weight(j)).collect()
    }
}

/// `(r+j)!/(2r+2j)!`; at `r = 0` this is the formal limit `j!/(2j)!`.
pub fn gamma_weight_exact(r: u64, j: u64) -> BigRational {
    BigRational::new(factorial(r + j), factorial(2 * r + 2 * j))
}

/// Scalar integer parameter, weights in exact arithmetic.
#[derive(Clone, Debug)]
pub struct ExactWeights {
    r: u64,
}

impl ExactWeights {
    pub fn new(r: u64) -> Result<Self> {
        if r == 0 {
            return Err(Error::NotPositiveStable { eigenvalue: Complex64::zero() });
        }
        Ok(Self { r })
    }

    /// `R → 0` taken formally; skips the positive-stability check on purpose.
    pub fn formal_zero() -> Self {
        Self { r: 0 }
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn rational(&self, j: usize) -> BigRational {
        gamma_weight_exact(self.r, j as u64)
    }

    pub fn rationals(&self, upto: usize) -> Vec<BigRational> {
        let mut out = Vec::with_capacity(upto + 1);
        let mut w = self.rational(0);
        out.push(w.clone());
        for j in 0..upto as u64 {
            let a = self.r + j;
            w *= BigRational::new(BigInt::from(a + 1), BigInt::from((2 * a + 1) * (2 * a + 2)));
            out.push(w.clone());
        }
        out
    }
}

impl<S: Scalar> GammaWeights<S> for ExactWeights {
    fn dim(&self) -> usize {
        1
    }

    fn weight(&self, j: usize) -> Result<Mat<S>> {
        Ok(Mat::scalar(S::from_rational(&self.rational(j))))
    }

    fn weights(&self, upto: usize) -> Result<Vec<Mat<S>>> {
        Ok(self.rationals(upto).iter().map(|w| Mat::scalar(S::from_rational(w))).collect())
    }
}

/// Matrix parameter, weights through the eigendecomposition in hardware floats.
#[derive(Debug)]
pub struct EigenWeights {
    r: CMatrix,
    eig: EigSystem,
    cache: RwLock<HashMap<usize, CMatrix>>,
}

impl EigenWeights {
    pub fn new(r: &CMatrix) -> Result<Self> {
        check_positive_stable(r)?;
        let eig = eig_decompose(r, RECONSTRUCTION_TOL)?;
        Ok(Self { r: r.clone(), eig, cache: RwLock::new(HashMap::new()) })
    }

    pub fn from_system(r: &CMatrix, eig: EigSystem) -> Self {
        Self { r: r.clone(), eig, cache: RwLock::new(HashMap::new()) }
    }

    pub fn parameter(&self) -> &CMatrix {
        &self.r
    }

    pub fn system(&self) -> &EigSystem {
        &self.eig
    }
}

/// `exp(ln Γ(w+j+1) − ln Γ(2w+2j+1))`, never the direct ratio (which
/// overflows long before the weight itself underflows).
pub fn scalar_gamma_ratio(w: Complex64, j: usize) -> Result<Complex64> {
    let j = j as f64;
    let num = complex_log_gamma(w + (j + 1.0))?;
    let den = complex_log_gamma(2.0 * w + (2.0 * j + 1.0))?;
    Ok((num - den).exp())
}

impl GammaWeights<Complex64> for EigenWeights {
    fn dim(&self) -> usize {
        self.r.dim()
    }

    fn weight(&self, j: usize) -> Result<CMatrix> {
        if let Some(w) = self.cache.read().expect("weight cache poisoned").get(&j) {
            return Ok(w.clone());
        }
        let w = self.eig.try_apply(|lambda| scalar_gamma_ratio(lambda, j))?;
        self.cache.write().expect("weight cache poisoned").insert(j, w.clone());
        Ok(w)
    }
}

pub fn gamma_weight(r: &CMatrix, j: usize) -> Result<CMatrix> {
    EigenWeights::new(r)?.weight(j)
}

/// Scalar rational parameter at a fixed binary precision. Integer values take
/// the exact factorial path; others go through the multiprecision log-gamma.
#[derive(Debug)]
pub struct MpWeights {
    r: BigRational,
    bits: usize,
    cache: RwLock<HashMap<usize, MpComplex>>,
}

impl MpWeights {
    pub fn new(r: BigRational, bits: usize) -> Result<Self> {
        if r <= BigRational::zero() {
            return Err(Error::NotPositiveStable {
                eigenvalue: Complex64::new(crate::scalar::rational_to_f64(&r), 0.0),
            });
        }
        Ok(Self { r, bits, cache: RwLock::new(HashMap::new()) })
    }

    fn compute(&self, j: usize) -> Result<MpComplex> {
        if self.r.is_integer() {
            let r = self.r.to_integer().try_into().map_err(|_| Error::InvalidInput("R too large".into()))?;
            return Ok(MpComplex::from_rational_bits(&gamma_weight_exact(r, j as u64), self.bits));
        }
        let work = self.bits + 32;
        let jr = BigRational::from_integer(BigInt::from(j));
        let one = BigRational::from_integer(BigInt::from(1));
        let two = BigRational::from_integer(BigInt::from(2));
        let a = mp::float_from_rational(&(&self.r + &jr + &one), work);
        let b = mp::float_from_rational(&(&two * &self.r + &two * &jr + &one), work);
        let diff = mp::ln_gamma(&a, work)? - mp::ln_gamma(&b, work)?;
        Ok(MpComplex::from_real(diff.exp()).with_precision(self.bits))
    }
}

impl GammaWeights<MpComplex> for MpWeights {
    fn dim(&self) -> usize {
        1
    }

    fn weight(&self, j: usize) -> Result<Mat<MpComplex>> {
        if let Some(w) = self.cache.read().expect("weight cache poisoned").get(&j) {
            return Ok(Mat::scalar(w.clone()));
        }
        let w = self.compute(j)?;
        self.cache.write().expect("weight cache poisoned").insert(j, w.clone());
        Ok(Mat::scalar(w))
    }
}
