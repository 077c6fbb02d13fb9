use num_bigint::BigInt;
use num_rational::BigRational;

use super::{determinant_terms, lambda1v, lambda2v_convolution, lambda2v_series, lambda2v_umbral, powers, to_xpoly};
use crate::error::Result;
use crate::families::{gamma_seq_from, phi_values, PhiFamily};
use crate::matfun::{GammaWeights, Mat};
use crate::scalar::{binomial_table, factorial, Scalar};
use crate::umbral::{apply_derivative_x, apply_multiplicative, evaluate, shift_power, UmbralExpr};

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub identity: String,
    pub params: Vec<(String, String)>,
    pub max_abs: f64,
    pub max_rel: f64,
    pub pass: bool,
    /// Documents a known discrepancy; never counts as a failure.
    pub informational: bool,
    pub note: Option<String>,
}

impl VerifyReport {
    pub fn with_param(mut self, key: &str, value: impl Into<String>) -> Self {
        self.params.push((key.to_string(), value.into()));
        self
    }

    pub fn counts_as_failure(&self) -> bool {
        !self.pass && !self.informational
    }
}

/// Running maximum of residuals over many `lhs = rhs` comparisons.
#[derive(Clone, Debug)]
pub struct Tally {
    max_abs: f64,
    max_rel: f64,
    all_zero: bool,
    exact: bool,
    tol: f64,
}

impl Tally {
    pub fn new<S: Scalar>() -> Self {
        Self { max_abs: 0.0, max_rel: 0.0, all_zero: true, exact: S::EXACT, tol: S::rel_tolerance() }
    }

    /// Compares `lhs` and `rhs`; `scale` is a magnitude for the relative
    /// residual when both sides are small compared to the terms summed.
    pub fn record<S: Scalar>(&mut self, lhs: &Mat<S>, rhs: &Mat<S>, scale: f64) {
        let diff = lhs - rhs;
        if diff.is_zero() {
            return;
        }
        self.all_zero = false;
        let abs = diff.frobenius_norm();
        let denom = lhs.frobenius_norm().max(rhs.frobenius_norm()).max(scale).max(f64::MIN_POSITIVE);
        self.max_abs = self.max_abs.max(abs);
        self.max_rel = self.max_rel.max(abs / denom);
    }

    pub fn pass(&self) -> bool {
        if self.exact {
            self.all_zero
        } else {
            self.max_rel <= self.tol
        }
    }

    pub fn report(self, identity: &str) -> VerifyReport {
        VerifyReport {
            identity: identity.to_string(),
            params: Vec::new(),
            max_abs: self.max_abs,
            max_rel: self.max_rel,
            pass: self.pass(),
            informational: false,
            note: None,
        }
    }
}

fn series_upto<S: Scalar>(
    n: usize,
    x: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
) -> Result<Vec<Mat<S>>> {
    (0..=n).map(|k| lambda2v_series(k, x, y, weights, fam)).collect()
}

fn sum_norms<S: Scalar>(terms: &[Mat<S>]) -> f64 {
    terms.iter().map(Mat::frobenius_norm).sum()
}

fn sum<S: Scalar>(dim: usize, terms: &[Mat<S>]) -> Mat<S> {
    terms.iter().fold(Mat::zeros(dim), |acc, t| &acc + t)
}

/// Convolution and umbral routes against the explicit series.
pub fn verify_constructions<S: Scalar>(
    n: usize,
    x: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
) -> Result<VerifyReport> {
    let mut tally = Tally::new::<S>();
    let series = lambda2v_series(n, x, y, weights, fam)?;
    let scale = series.frobenius_norm();
    tally.record(&lambda2v_convolution(n, x, y, weights, fam)?, &series, scale);
    tally.record(&lambda2v_umbral(n, x, y, weights, fam)?, &series, scale);
    Ok(tally.report("series-eq"))
}

pub fn verify_determinant<S: Scalar>(
    n: usize,
    x: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
) -> Result<VerifyReport> {
    let mut tally = Tally::new::<S>();
    let series = lambda2v_series(n, x, y, weights, fam)?;
    let terms = determinant_terms(n, x, y, weights, fam)?;
    tally.record(&sum(weights.dim(), &terms), &series, sum_norms(&terms));
    Ok(tally.report("determinant"))
}

/// `Σ_{j≤k} C(k,j)·G_{k−j}(x,y)·γ_j(y) = λ_k(x)` for every `k ≤ n`.
pub fn verify_triangular_system<S: Scalar>(
    n: usize,
    x: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
) -> Result<VerifyReport> {
    let g = series_upto(n, x, y, weights, fam)?;
    let gamma = gamma_seq_from(&phi_values(fam, n, y)?)?;
    let binom = binomial_table::<S>(n);
    let mut tally = Tally::new::<S>();
    for k in 0..=n {
        let terms: Vec<Mat<S>> = (0..=k).map(|j| g[k - j].scale(&(binom[k][j].clone() * gamma[j].clone()))).collect();
        tally.record(&sum(weights.dim(), &terms), &lambda1v(k, x, weights)?, sum_norms(&terms));
    }
    Ok(tally.report("triangular"))
}

/// `Σ_j C(m,j)·φ_j·γ_{m−j} = [m = 0]` for `m ≤ n`.
pub fn verify_gamma_seq<S: Scalar>(n: usize, y: &S, fam: &PhiFamily) -> Result<VerifyReport> {
    let phi = phi_values(fam, n, y)?;
    let gamma = gamma_seq_from(&phi)?;
    let binom = binomial_table::<S>(n);
    let mut tally = Tally::new::<S>();
    for m in 0..=n {
        let terms: Vec<S> = (0..=m).map(|j| binom[m][j].clone() * phi[j].clone() * gamma[m - j].clone()).collect();
        let scale = terms.iter().map(Scalar::magnitude).sum();
        let total = terms.into_iter().fold(S::zero(), |a, b| a + b);
        let expected = if m == 0 { S::one() } else { S::zero() };
        tally.record(&Mat::scalar(total), &Mat::scalar(expected), scale);
    }
    Ok(tally.report("gamma-seq"))
}

/// `d^j/dx^j G_n = n!/(n−j)!·G_{n−j}`, coefficientwise, for `1 ≤ j ≤ n`.
pub fn verify_derivative<S: Scalar>(
    n: usize,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
) -> Result<VerifyReport> {
    let p = to_xpoly(n, y, weights, fam)?;
    let mut tally = Tally::new::<S>();
    let mut d = p.clone();
    for j in 1..=n {
        d = d.derivative();
        let factor = S::from_rational(&BigRational::new(factorial(n as u64), factorial((n - j) as u64)));
        let expected = to_xpoly(n - j, y, weights, fam)?.scale(&factor);
        for (a, b) in d.coeffs().iter().zip(expected.coeffs()) {
            tally.record(a, b, 0.0);
        }
    }
    Ok(tally.report("derivative"))
}

/// `G_n(x+z) = Σ_j C(n,j)·z^j·G_{n−j}(x)`.
pub fn verify_shift<S: Scalar>(
    n: usize,
    x: &S,
    z: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
) -> Result<VerifyReport> {
    let g = series_upto(n, x, y, weights, fam)?;
    let binom = binomial_table::<S>(n);
    let zs = powers(z, n);
    let terms: Vec<Mat<S>> = (0..=n).map(|j| g[n - j].scale(&(binom[n][j].clone() * zs[j].clone()))).collect();
    let lhs = lambda2v_series(n, &(x.clone() + z.clone()), y, weights, fam)?;
    let mut tally = Tally::new::<S>();
    tally.record(&lhs, &sum(weights.dim(), &terms), sum_norms(&terms));
    Ok(tally.report("shift"))
}

/// `G_{r+s}(z) = Σ_{i≤r, j≤s} C(r,i)·C(s,j)·(z−x)^{i+j}·G_{r+s−i−j}(x)` for all `r + s ≤ n`.
pub fn verify_double_shift<S: Scalar>(
    n: usize,
    x: &S,
    z: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
) -> Result<VerifyReport> {
    let gx = series_upto(n, x, y, weights, fam)?;
    let gz = series_upto(n, z, y, weights, fam)?;
    let binom = binomial_table::<S>(n);
    let ds = powers(&(z.clone() - x.clone()), n);
    let mut tally = Tally::new::<S>();
    for r in 0..=n {
        for s in 0..=n - r {
            let mut terms = Vec::new();
            for i in 0..=r {
                for j in 0..=s {
                    let c = binom[r][i].clone() * binom[s][j].clone() * ds[i + j].clone();
                    terms.push(gx[r + s - i - j].scale(&c));
                }
            }
            tally.record(&gz[r + s], &sum(weights.dim(), &terms), sum_norms(&terms));
        }
    }
    Ok(tally.report("double-shift"))
}

fn bounded_difference_terms<S: Scalar>(n: usize, z: &S, g: &[Mat<S>], upper: usize) -> Vec<Mat<S>> {
    let binom = binomial_table::<S>(n + 1);
    let zs = powers(z, n + 1);
    (1..=upper).map(|j| g[n + 1 - j].scale(&(binom[n + 1][j].clone() * zs[j].clone()))).collect()
}

fn stated_bound_note(report: &VerifyReport) -> String {
    if report.pass {
        "upper bound n holds here (the j = n+1 term vanishes)".into()
    } else {
        "upper bound n omits the j = n+1 term C(n+1,n+1)·z^(n+1)·G_0; use bound n+1".into()
    }
}

/// Forward difference `G_{n+1}(x+z) − G_{n+1}(x) = Σ_{j=1}^{B} C(n+1,j)·G_{n+1−j}(x)·z^j`,
/// once with `B = n + 1` (must hold) and once with `B = n` (reported only).
pub fn verify_difference<S: Scalar>(
    n: usize,
    x: &S,
    z: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
) -> Result<Vec<VerifyReport>> {
    let g = series_upto(n + 1, x, y, weights, fam)?;
    let lhs = &lambda2v_series(n + 1, &(x.clone() + z.clone()), y, weights, fam)? - &g[n + 1];
    let mut out = Vec::new();
    for (upper, identity) in [(n + 1, "difference"), (n, "difference-stated-bound")] {
        let terms = bounded_difference_terms(n, z, &g, upper);
        let mut tally = Tally::new::<S>();
        tally.record(&lhs, &sum(weights.dim(), &terms), sum_norms(&terms));
        let mut report = tally.report(identity);
        if upper == n {
            report.informational = true;
            report.note = Some(stated_bound_note(&report));
        }
        out.push(report);
    }
    Ok(out)
}

/// `∫_x^{x+z} G_n dx = (1/(n+1))·Σ_{j=1}^{B} C(n+1,j)·G_{n+1−j}(x)·z^j`, via the exact
/// antiderivative of the coefficient form; both bounds as in [`verify_difference`].
pub fn verify_integral<S: Scalar>(
    n: usize,
    x: &S,
    z: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
) -> Result<Vec<VerifyReport>> {
    let anti = to_xpoly(n, y, weights, fam)?.antiderivative();
    let lhs = &anti.eval(&(x.clone() + z.clone())) - &anti.eval(x);
    let g = series_upto(n + 1, x, y, weights, fam)?;
    let inv = S::from_rational(&BigRational::new(BigInt::from(1), BigInt::from(n + 1)));
    let mut out = Vec::new();
    for (upper, identity) in [(n + 1, "integral"), (n, "integral-stated-bound")] {
        let terms: Vec<Mat<S>> = bounded_difference_terms(n, z, &g, upper).iter().map(|t| t.scale(&inv)).collect();
        let mut tally = Tally::new::<S>();
        tally.record(&lhs, &sum(weights.dim(), &terms), sum_norms(&terms));
        let mut report = tally.report(identity);
        if upper == n {
            report.informational = true;
            report.note = Some(stated_bound_note(&report));
        }
        out.push(report);
    }
    Ok(out)
}

/// Raising, lowering and their composite on the umbral states `Sₘ`, `m ≤ n`,
/// with the raised state also compared against the explicit series.
pub fn verify_monomiality<S: Scalar>(
    n: usize,
    x: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
) -> Result<VerifyReport> {
    let mut tally = Tally::new::<S>();
    let ev = |e: &UmbralExpr| evaluate(e, weights, fam, x, y);
    for m in 0..=n {
        let state = shift_power(m as u32)?;
        let current = ev(&state)?;
        let raised = ev(&apply_multiplicative(&state)?)?;
        let scale = raised.frobenius_norm();
        tally.record(&raised, &ev(&*shift_power(m as u32 + 1)?)?, scale);
        tally.record(&raised, &lambda2v_series(m + 1, x, y, weights, fam)?, scale);
        let lowered = apply_derivative_x(&state);
        let m_s = S::from_i64(m as i64);
        if m > 0 {
            let previous = ev(&*shift_power(m as u32 - 1)?)?;
            tally.record(&ev(&lowered)?, &previous.scale(&m_s), 0.0);
        }
        let composite = ev(&apply_multiplicative(&lowered)?)?;
        tally.record(&composite, &current.scale(&m_s), current.frobenius_norm());
    }
    Ok(tally.report("monomiality"))
}
