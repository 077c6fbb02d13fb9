//! Coefficient sequences `φ_n(y)` of the two-variable general polynomials,
//! the polynomials themselves, and the reciprocal sequence `γ_n(y)`.
//!
//! Every family here has `φ_n(y) = a_n·y^{e_n}` with rational `a_n`, so the
//! same table feeds exact, float and multiprecision evaluation.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{binomial_table, factorial, pow_u, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PhiFamily {
    /// `φ(y,t) = e^{y t^m}`
    GouldHopper(u32),
    /// Gould–Hopper with `m = 2`.
    Hermite,
    /// `φ(y,t) = C₀(yt)`
    Laguerre,
    /// `φ(y,t) = C₀(−y t^m)`
    GeneralizedLaguerre(u32),
    /// `φ(y,t) = 1/(1 − yt)`
    TruncatedExp,
    Custom(CustomTable),
}

/// Finite `(a_n, e_n)` table; `φ_n` beyond its length is undefined.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CustomTable {
    coeffs: Vec<(BigRational, u32)>,
}

impl CustomTable {
    pub fn new(coeffs: Vec<(BigRational, u32)>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("custom family needs at least phi_0".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn max_index(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[(BigRational, u32)] {
        &self.coeffs
    }
}

impl PhiFamily {
    /// Parses the built-in family names: `gh:m`, `hermite`, `lag`, `glag:m`, `te`.
    pub fn parse_builtin(text: &str) -> Result<Self> {
        let text = text.trim();
        let order = |s: &str| -> Result<u32> {
            match s.parse::<u32>() {
                Ok(m) if m >= 1 => Ok(m),
                _ => Err(Error::InvalidInput(format!("family order must be a positive integer, got '{s}'"))),
            }
        };
        match text {
            "hermite" => Ok(Self::Hermite),
            "lag" => Ok(Self::Laguerre),
            "te" => Ok(Self::TruncatedExp),
            _ => {
                if let Some(m) = text.strip_prefix("gh:") {
                    Ok(Self::GouldHopper(order(m)?))
                } else if let Some(m) = text.strip_prefix("glag:") {
                    Ok(Self::GeneralizedLaguerre(order(m)?))
                } else {
                    Err(Error::InvalidInput(format!(
                        "unknown family '{text}' (expected gh:m, hermite, lag, glag:m, te or custom:<file>)"
                    )))
                }
            }
        }
    }

    /// Largest index with a defined `φ_n`, if finite.
    pub fn max_index(&self) -> Option<usize> {
        match self {
            Self::Custom(table) => Some(table.max_index()),
            _ => None,
        }
    }

    /// `(a_n, e_n)` with `φ_n(y) = a_n·y^{e_n}`.
    pub fn coefficient(&self, n: usize) -> Result<(BigRational, u32)> {
        let nb = n as u64;
        let lacunary = |m: u32, squared: bool| -> Result<(BigRational, u32)> {
            if m == 0 {
                return Err(Error::InvalidInput("family order must be at least 1".into()));
            }
            if !nb.is_multiple_of(m as u64) {
                return Ok((BigRational::zero(), 0));
            }
            let k = nb / m as u64;
            let kf = factorial(k);
            let den = if squared { &kf * &kf } else { kf };
            Ok((BigRational::new(factorial(nb), den), k as u32))
        };
        match self {
            Self::GouldHopper(m) => lacunary(*m, false),
            Self::Hermite => lacunary(2, false),
            Self::GeneralizedLaguerre(m) => lacunary(*m, true),
            Self::Laguerre => {
                let sign = if n.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
                Ok((BigRational::new(sign, factorial(nb)), n as u32))
            }
            Self::TruncatedExp => Ok((BigRational::from_integer(factorial(nb)), n as u32)),
            Self::Custom(table) => table
                .coeffs
                .get(n)
                .cloned()
                .ok_or(Error::FamilyIndexOutOfRange { n, max: table.max_index() }),
        }
    }
}

impl fmt::Display for PhiFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GouldHopper(m) => write!(f, "gh:{m}"),
            Self::Hermite => write!(f, "hermite"),
            Self::Laguerre => write!(f, "lag"),
            Self::GeneralizedLaguerre(m) => write!(f, "glag:{m}"),
            Self::TruncatedExp => write!(f, "te"),
            Self::Custom(_) => write!(f, "custom"),
        }
    }
}

pub fn phi_n<S: Scalar>(fam: &PhiFamily, n: usize, y: &S) -> Result<S> {
    let (a, e) = fam.coefficient(n)?;
    if a.is_zero() {
        return Ok(S::zero());
    }
    Ok(S::from_rational(&a) * pow_u(y, e))
}

/// `φ_0(y) … φ_upto(y)`.
pub fn phi_values<S: Scalar>(fam: &PhiFamily, upto: usize, y: &S) -> Result<Vec<S>> {
    (0..=upto).map(|n| phi_n(fam, n, y)).collect()
}

/// Tricomi function `C₀(z) = Σ_r (−1)^r z^r/(r!)²`, summed to rounding level.
pub fn tricomi_c0(z: Complex64) -> Complex64 {
    let mut term = Complex64::one();
    let mut sum = term;
    let mut r = 0.0f64;
    loop {
        r += 1.0;
        term *= -z / (r * r);
        sum += term;
        if term.norm() <= f64::EPSILON * sum.norm().max(1e-300) && r > z.norm().sqrt() {
            return sum;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GfForm {
    /// Truncated series with the given number of terms.
    Series(usize),
    Closed,
}

/// `φ(y,t) = Σ_n φ_n(y) tⁿ/n!`.
pub fn phi_gf(fam: &PhiFamily, y: Complex64, t: Complex64, form: GfForm) -> Result<Complex64> {
    if *fam == PhiFamily::TruncatedExp {
        let modulus = (y * t).norm();
        if modulus >= 1.0 {
            return Err(Error::DivergenceRegion { modulus });
        }
    }
    match form {
        GfForm::Series(terms) => {
            let mut sum = Complex64::zero();
            let mut t_pow_over_fact = Complex64::one();
            for n in 0..terms {
                if n > 0 {
                    t_pow_over_fact *= t / n as f64;
                }
                let (a, e) = fam.coefficient(n)?;
                if a.is_zero() {
                    continue;
                }
                let a = crate::scalar::rational_to_f64(&a);
                sum += a * y.powu(e) * t_pow_over_fact;
            }
            Ok(sum)
        }
        GfForm::Closed => match fam {
            PhiFamily::GouldHopper(m) => Ok((y * t.powu(*m)).exp()),
            PhiFamily::Hermite => Ok((y * t * t).exp()),
            PhiFamily::Laguerre => Ok(tricomi_c0(y * t)),
            PhiFamily::GeneralizedLaguerre(m) => Ok(tricomi_c0(-y * t.powu(*m))),
            PhiFamily::TruncatedExp => Ok(1.0 / (1.0 - y * t)),
            PhiFamily::Custom(_) => Err(Error::Unsupported("custom families have no closed-form generating function".into())),
        },
    }
}

/// `p_n(x,y) = Σ_j C(n,j) φ_j(y) x^{n−j}`.
pub fn general_poly<S: Scalar>(fam: &PhiFamily, n: usize, x: &S, y: &S) -> Result<S> {
    let binom = binomial_table::<S>(n);
    let phi = phi_values(fam, n, y)?;
    Ok(general_poly_with(&binom[n], &phi, x))
}

/// Same as [`general_poly`] with precomputed binomial row and `φ` values.
pub fn general_poly_with<S: Scalar>(binom_row: &[S], phi: &[S], x: &S) -> S {
    let n = binom_row.len() - 1;
    // Horner in x over the coefficients C(n,j)φ_j, highest power first.
    let mut acc = S::zero();
    for j in 0..=n {
        acc = acc * x.clone();
        if !phi[j].is_zero() {
            acc = acc + binom_row[j].clone() * phi[j].clone();
        }
    }
    acc
}

/// Coefficients of the reciprocal series: `Σ_j C(n,j) φ_j γ_{n−j} = [n = 0]`.
pub fn gamma_seq<S: Scalar>(fam: &PhiFamily, upto: usize, y: &S) -> Result<Vec<S>> {
    let phi = phi_values(fam, upto, y)?;
    gamma_seq_from(&phi)
}

pub fn gamma_seq_from<S: Scalar>(phi: &[S]) -> Result<Vec<S>> {
    if phi[0].is_zero() {
        return Err(Error::ZeroPhi0);
    }
    let upto = phi.len() - 1;
    let binom = binomial_table::<S>(upto);
    let inv0 = S::one() / phi[0].clone();
    let mut gamma = vec![inv0.clone()];
    for n in 1..=upto {
        let mut acc = S::zero();
        for j in 1..=n {
            if phi[j].is_zero() {
                continue;
            }
            acc = acc + binom[n][j].clone() * phi[j].clone() * gamma[n - j].clone();
        }
        gamma.push(-(inv0.clone() * acc));
    }
    Ok(gamma)
}
