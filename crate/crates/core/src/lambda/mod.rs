//! The λ-matrix polynomials and the four constructions of the two-variable
//! general family, plus executable checks of the identities they satisfy.

mod gf;
mod verify;
mod xpoly;

pub use gf::{cos_r, cos_r_squared, e0_series, phi_gf_closed, verify_egf, verify_ogf, GfReport, Truncation};
pub use verify::{
    verify_constructions, verify_derivative, verify_determinant, verify_difference, verify_double_shift,
    verify_gamma_seq, verify_integral, verify_monomiality, verify_shift, verify_triangular_system, Tally,
    VerifyReport,
};
pub use xpoly::XPoly;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::families::{gamma_seq_from, general_poly_with, phi_values, PhiFamily};
use crate::matfun::{determinant, GammaWeights, Mat};
use crate::scalar::{binomial_table, factorial, signed_unit, Scalar};
use crate::umbral::{evaluate, shift_power};

/// Largest degree accepted by [`determinant_form`].
pub const DETERMINANT_MAX_N: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    Series,
    Convolution,
    Umbral,
    Determinant,
}

impl Route {
    pub const ALL: [Route; 4] = [Route::Series, Route::Convolution, Route::Umbral, Route::Determinant];

    pub fn name(self) -> &'static str {
        match self {
            Route::Series => "series",
            Route::Convolution => "convolution",
            Route::Umbral => "umbral",
            Route::Determinant => "determinant",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == text)
            .ok_or_else(|| Error::InvalidInput(format!("unknown route '{text}'")))
    }
}

fn powers<S: Scalar>(x: &S, upto: usize) -> Vec<S> {
    let mut out = Vec::with_capacity(upto + 1);
    out.push(S::one());
    for k in 1..=upto {
        out.push(out[k - 1].clone() * x.clone());
    }
    out
}

/// `Σ_j a_j·M_j`, skipping zero scalars.
fn combine<S: Scalar>(dim: usize, terms: impl IntoIterator<Item = (S, Mat<S>)>) -> Mat<S> {
    let mut acc = Mat::zeros(dim);
    for (a, m) in terms {
        if !a.is_zero() {
            acc = &acc + &m.scale(&a);
        }
    }
    acc
}

/// One-variable λ-matrix polynomial `Σ_j C(n,j)(−1)^j C_j x^{n−j}`.
pub fn lambda1v<S: Scalar>(n: usize, x: &S, weights: &dyn GammaWeights<S>) -> Result<Mat<S>> {
    let c = weights.weights(n)?;
    let binom = binomial_table::<S>(n);
    Ok(lambda1v_with(n, x, &c, &binom))
}

fn lambda1v_with<S: Scalar>(n: usize, x: &S, c: &[Mat<S>], binom: &[Vec<S>]) -> Mat<S> {
    let xs = powers(x, n);
    let dim = c[0].dim();
    combine(dim, (0..=n).map(|j| (binom[n][j].clone() * signed_unit::<S>(j) * xs[n - j].clone(), c[j].clone())))
}

/// Two-variable λ-matrix polynomial `Σ_j C(n,j)(−1)^j C_j x^j y^{n−j}`.
pub fn lambda_matrix_2var<S: Scalar>(n: usize, x: &S, y: &S, weights: &dyn GammaWeights<S>) -> Result<Mat<S>> {
    let c = weights.weights(n)?;
    let binom = binomial_table::<S>(n);
    let (xs, ys) = (powers(x, n), powers(y, n));
    Ok(combine(
        weights.dim(),
        (0..=n).map(|j| (binom[n][j].clone() * signed_unit::<S>(j) * xs[j].clone() * ys[n - j].clone(), c[j].clone())),
    ))
}

/// Scalar λ-polynomial `n! Σ_j (−1)^j x^j y^{n−j} / ((2j)!(n−j)!)`.
pub fn scalar_lambda<S: Scalar>(n: usize, x: &S, y: &S) -> S {
    let nf = factorial(n as u64);
    let (xs, ys) = (powers(x, n), powers(y, n));
    (0..=n).fold(S::zero(), |acc, j| {
        let c = BigRational::new(nf.clone(), factorial(2 * j as u64) * factorial((n - j) as u64));
        acc + S::from_rational(&c) * signed_unit::<S>(j) * xs[j].clone() * ys[n - j].clone()
    })
}

/// `Σ_j C(n,j)(−1)^j p_{n−j}(x,y) C_j(R)`.
pub fn lambda2v_series<S: Scalar>(
    n: usize,
    x: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
) -> Result<Mat<S>> {
    let c = weights.weights(n)?;
    let binom = binomial_table::<S>(n);
    let phi = phi_values(fam, n, y)?;
    Ok(combine(
        weights.dim(),
        (0..=n).map(|j| {
            let p = general_poly_with(&binom[n - j], &phi[..=n - j], x);
            (binom[n][j].clone() * signed_unit::<S>(j) * p, c[j].clone())
        }),
    ))
}

/// `Σ_j C(n,j) λ_j(x) φ_{n−j}(y)`.
pub fn lambda2v_convolution<S: Scalar>(
    n: usize,
    x: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
) -> Result<Mat<S>> {
    let c = weights.weights(n)?;
    let binom = binomial_table::<S>(n);
    let phi = phi_values(fam, n, y)?;
    Ok(combine(
        weights.dim(),
        (0..=n).map(|j| (binom[n][j].clone() * phi[n - j].clone(), lambda1v_with(j, x, &c, &binom))),
    ))
}

/// Vacuum evaluation of `(x + q̂ − Ĵ)ⁿ`.
pub fn lambda2v_umbral<S: Scalar>(
    n: usize,
    x: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
) -> Result<Mat<S>> {
    let n = u32::try_from(n).map_err(|_| Error::InvalidInput("degree too large".into()))?;
    evaluate(&*shift_power(n)?, weights, fam, x, y)
}

/// Determinant form: the `(n+1)×(n+1)` array whose first row holds
/// `C_0, λ_1(x), …, λ_n(x)` and whose row `r ≥ 1` holds `C(k, r−1)·γ_{k−r+1}`,
/// expanded along the first row. Only that row is matrix-valued, so every
/// cofactor is an ordinary scalar determinant.
pub fn determinant_form<S: Scalar>(
    n: usize,
    x: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
) -> Result<Mat<S>> {
    let terms = determinant_terms(n, x, y, weights, fam)?;
    Ok(terms.iter().fold(Mat::zeros(weights.dim()), |acc, t| &acc + t))
}

/// The first-row cofactor terms of [`determinant_form`], each already divided
/// by `(−γ₀)^{n+1}`; their sum is the determinant.
pub(crate) fn determinant_terms<S: Scalar>(
    n: usize,
    x: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
) -> Result<Vec<Mat<S>>> {
    if n > DETERMINANT_MAX_N {
        return Err(Error::CostGuard { n, max: DETERMINANT_MAX_N });
    }
    let phi = phi_values(fam, n, y)?;
    let gamma = gamma_seq_from(&phi)?;
    let c = weights.weights(n)?;
    let binom = binomial_table::<S>(n);
    let lower: Vec<Vec<S>> = (1..=n)
        .map(|r| {
            (0..=n)
                .map(|k| if k + 1 >= r { binom[k][r - 1].clone() * gamma[k + 1 - r].clone() } else { S::zero() })
                .collect()
        })
        .collect();
    let mut g0_pow = S::one();
    for _ in 0..=n {
        g0_pow = g0_pow * gamma[0].clone();
    }
    let overall = signed_unit::<S>(n) / g0_pow;
    Ok((0..=n)
        .map(|k| {
            let minor: Vec<Vec<S>> =
                lower.iter().map(|row| row.iter().enumerate().filter(|&(col, _)| col != k).map(|(_, v)| v.clone()).collect()).collect();
            let cofactor = signed_unit::<S>(k) * determinant(minor) * overall.clone();
            lambda1v_with(k, x, &c, &binom).scale(&cofactor)
        })
        .collect())
}

pub fn lambda2v<S: Scalar>(
    route: Route,
    n: usize,
    x: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
) -> Result<Mat<S>> {
    match route {
        Route::Series => lambda2v_series(n, x, y, weights, fam),
        Route::Convolution => lambda2v_convolution(n, x, y, weights, fam),
        Route::Umbral => lambda2v_umbral(n, x, y, weights, fam),
        Route::Determinant => determinant_form(n, x, y, weights, fam),
    }
}

/// Coefficients in `x`: `c_m = Σ_j C(n,j)(−1)^j C(n−j, m) φ_{n−j−m}(y) C_j(R)`.
pub fn to_xpoly<S: Scalar>(n: usize, y: &S, weights: &dyn GammaWeights<S>, fam: &PhiFamily) -> Result<XPoly<S>> {
    let c = weights.weights(n)?;
    let binom = binomial_table::<S>(n);
    let phi = phi_values(fam, n, y)?;
    let coeffs = (0..=n)
        .map(|m| {
            combine(
                weights.dim(),
                (0..=n - m).map(|j| {
                    let s = n - j - m;
                    (binom[n][j].clone() * signed_unit::<S>(j) * binom[n - j][m].clone() * phi[s].clone(), c[j].clone())
                }),
            )
        })
        .collect();
    XPoly::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::ExactWeights;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn scalar(m: Mat<BigRational>) -> BigRational {
        m.as_scalar().unwrap().clone()
    }

    #[test]
    fn one_variable_small_values() {
        let w = ExactWeights::new(1).unwrap();
        assert_eq!(scalar(lambda1v(0, &q(7, 1), &w).unwrap()), q(1, 2));
        assert_eq!(scalar(lambda1v(1, &q(1, 1), &w).unwrap()), q(5, 12));
    }

    #[test]
    fn two_variable_matrix_small_values() {
        let w = ExactWeights::new(1).unwrap();
        assert_eq!(scalar(lambda_matrix_2var(1, &q(1, 1), &q(1, 1), &w).unwrap()), q(5, 12));
        let z = ExactWeights::formal_zero();
        let (x, y) = (q(3, 5), q(-2, 7));
        assert_eq!(scalar(lambda_matrix_2var(1, &x, &y, &z).unwrap()), y.clone() - x.clone() / q(2, 1));
        let w2 = ExactWeights::new(2).unwrap();
        let at_zero = scalar(lambda_matrix_2var(4, &q(0, 1), &y, &w2).unwrap());
        assert_eq!(at_zero, q(1, 12) * y.pow(4));
    }

    #[test]
    fn scalar_polynomial_small_degrees() {
        let (x, y) = (q(3, 2), q(5, 7));
        assert_eq!(scalar_lambda(0, &x, &y), q(1, 1));
        assert_eq!(scalar_lambda(1, &x, &y), y.clone() - x.clone() / q(2, 1));
        assert_eq!(scalar_lambda(2, &x, &y), y.clone() * y.clone() - x.clone() * y.clone() + x.clone() * x.clone() / q(12, 1));
    }

    #[test]
    fn four_routes_agree_on_hand_example() {
        let w = ExactWeights::new(1).unwrap();
        let one = q(1, 1);
        for route in Route::ALL {
            let v = scalar(lambda2v(route, 1, &one, &one, &w, &PhiFamily::TruncatedExp).unwrap());
            assert_eq!(v, q(11, 12), "{}", route.name());
            let v0 = scalar(lambda2v(route, 0, &one, &one, &w, &PhiFamily::TruncatedExp).unwrap());
            assert_eq!(v0, q(1, 2), "{}", route.name());
        }
    }

    #[test]
    fn determinant_form_first_order_closed_form() {
        let w = ExactWeights::new(2).unwrap();
        let (x, y) = (q(4, 3), q(-1, 5));
        let det = scalar(determinant_form(1, &x, &y, &w, &PhiFamily::TruncatedExp).unwrap());
        let l1 = scalar(lambda1v(1, &x, &w).unwrap());
        assert_eq!(det, l1 + q(1, 12) * y);
        assert_eq!(
            determinant_form(21, &x, &x, &w, &PhiFamily::TruncatedExp),
            Err(Error::CostGuard { n: 21, max: 20 })
        );
    }

    #[test]
    fn coefficient_extraction() {
        let w = ExactWeights::new(1).unwrap();
        let p = to_xpoly(1, &q(1, 1), &w, &PhiFamily::TruncatedExp).unwrap();
        assert_eq!(scalar(p.coeffs()[1].clone()), q(1, 2));
        assert_eq!(scalar(p.coeffs()[0].clone()), q(5, 12));
    }
}
