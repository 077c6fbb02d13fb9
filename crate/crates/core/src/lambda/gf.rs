use super::verify::{Tally, VerifyReport};
use super::{lambda2v_series, lambda_matrix_2var};
use crate::error::{Error, Result};
use crate::families::PhiFamily;
use crate::matfun::{GammaWeights, Mat};
use crate::scalar::{pow_u, signed_unit, Scalar, Transcendental};

/// How many terms of a rapidly decaying series to keep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation {
    Terms(usize),
    /// Stop once three consecutive terms fall below `tol` times the largest
    /// partial-sum norm seen so far.
    Tolerance(f64),
}

const MAX_SERIES_TERMS: usize = 4096;

fn sum_weighted_series<S: Scalar>(
    weights: &dyn GammaWeights<S>,
    trunc: Truncation,
    mut coeff: impl FnMut(usize) -> S,
) -> Result<Mat<S>> {
    let mut acc = Mat::zeros(weights.dim());
    let limit = match trunc {
        Truncation::Terms(k) => k,
        Truncation::Tolerance(_) => MAX_SERIES_TERMS,
    };
    let mut max_partial = 0.0f64;
    let mut small_run = 0;
    for j in 0..limit {
        let term = weights.weight(j)?.scale(&coeff(j));
        acc = &acc + &term;
        if let Truncation::Tolerance(tol) = trunc {
            max_partial = max_partial.max(acc.frobenius_norm());
            if term.frobenius_norm() < tol * max_partial {
                small_run += 1;
                if small_run == 3 {
                    return Ok(acc);
                }
            } else {
                small_run = 0;
            }
        }
    }
    if matches!(trunc, Truncation::Tolerance(_)) {
        return Err(Error::Unsupported(format!("series did not settle within {MAX_SERIES_TERMS} terms")));
    }
    Ok(acc)
}

/// `cos(√t; R) = Σ_j (−1)^j C_j(R) t^j / j!`, taking `t = x²` directly.
pub fn cos_r_squared<S: Scalar>(t: &S, weights: &dyn GammaWeights<S>, trunc: Truncation) -> Result<Mat<S>> {
    let mut coeffs: Vec<S> = vec![S::one()];
    sum_weighted_series(weights, trunc, |j| {
        while coeffs.len() <= j {
            let k = coeffs.len();
            let next = coeffs[k - 1].clone() * t.clone() / S::from_i64(k as i64);
            coeffs.push(next);
        }
        signed_unit::<S>(j) * coeffs[j].clone()
    })
}

pub fn cos_r<S: Scalar>(x: &S, weights: &dyn GammaWeights<S>, trunc: Truncation) -> Result<Mat<S>> {
    cos_r_squared(&(x.clone() * x.clone()), weights, trunc)
}

/// `e₀(z; R) = Σ_j (−1)^j C_j(R) z^j`.
pub fn e0_series<S: Scalar>(z: &S, weights: &dyn GammaWeights<S>, trunc: Truncation) -> Result<Mat<S>> {
    sum_weighted_series(weights, trunc, |j| signed_unit::<S>(j) * pow_u(z, j as u32))
}

/// Tolerance for series summed inside a generating-function check: well below
/// the working precision so truncation never masks the measured order.
fn series_tol<S: Scalar>() -> f64 {
    let t = S::rel_tolerance();
    t * t / 16.0
}

fn tricomi<S: Scalar>(z: &S) -> Result<S> {
    let tol = series_tol::<S>();
    let mut term = S::one();
    let mut sum = S::one();
    for r in 1..MAX_SERIES_TERMS as i64 {
        term = -(term * z.clone()) / S::from_i64(r * r);
        sum = sum + term.clone();
        if term.magnitude() <= tol * sum.magnitude() && (r * r) as f64 > z.magnitude() {
            return Ok(sum);
        }
    }
    Err(Error::Unsupported("Tricomi series did not settle".into()))
}

/// Closed form of `φ(y,t)` in a scalar type with an exponential.
pub fn phi_gf_closed<S: Transcendental>(fam: &PhiFamily, y: &S, t: &S) -> Result<S> {
    match fam {
        PhiFamily::GouldHopper(m) => (y.clone() * pow_u(t, *m)).exp(),
        PhiFamily::Hermite => (y.clone() * t.clone() * t.clone()).exp(),
        PhiFamily::Laguerre => tricomi(&(y.clone() * t.clone())),
        PhiFamily::GeneralizedLaguerre(m) => tricomi(&-(y.clone() * pow_u(t, *m))),
        PhiFamily::TruncatedExp => {
            let yt = y.clone() * t.clone();
            let modulus = yt.magnitude();
            if modulus >= 1.0 {
                return Err(Error::DivergenceRegion { modulus });
            }
            Ok(S::one() / (S::one() - yt))
        }
        PhiFamily::Custom(_) => Err(Error::Unsupported("custom families have no closed-form generating function".into())),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GfReport {
    pub report: VerifyReport,
    /// `(t, residual)` per sample.
    pub residuals: Vec<(String, f64)>,
    /// Fitted order between consecutive samples with nonzero residuals.
    pub orders: Vec<f64>,
    pub expected_order: f64,
}

fn finish_gf<S: Scalar>(identity: &str, n_max: usize, ts: &[S], lhs_rhs: Vec<(Mat<S>, Mat<S>)>) -> GfReport {
    let mut tally = Tally::new::<S>();
    let mut residuals = Vec::new();
    for (t, (lhs, rhs)) in ts.iter().zip(&lhs_rhs) {
        tally.record(lhs, rhs, 0.0);
        residuals.push((t.to_text(), (lhs - rhs).frobenius_norm()));
    }
    let mut orders = Vec::new();
    for w in ts.iter().zip(&residuals).collect::<Vec<_>>().windows(2) {
        let ((t0, (_, r0)), (t1, (_, r1))) = (w[0], w[1]);
        if *r0 > 0.0 && *r1 > 0.0 {
            orders.push((r0 / r1).ln() / (t0.magnitude() / t1.magnitude()).ln());
        }
    }
    let expected_order = (n_max + 1) as f64;
    let mut report = tally.report(identity);
    let at_origin_ok = ts.iter().zip(&residuals).all(|(t, (_, r))| !t.is_zero() || *r == 0.0);
    report.pass = at_origin_ok && !orders.is_empty() && orders.iter().all(|p| (p - expected_order).abs() <= 0.5);
    report.note = Some(format!(
        "fitted orders [{}], expected {expected_order}",
        orders.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>().join(", ")
    ));
    GfReport { report, residuals, orders, expected_order }
}

/// Truncated exponential generating function against its closed form
/// `e^{xt}·φ(y,t)·cos(√t; R)`; the residual at `t` should scale as
/// `t^{n_max+1}`.
pub fn verify_egf<S: Transcendental>(
    n_max: usize,
    x: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    fam: &PhiFamily,
    ts: &[S],
) -> Result<GfReport> {
    let g: Vec<Mat<S>> = (0..=n_max).map(|n| lambda2v_series(n, x, y, weights, fam)).collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for t in ts {
        let mut lhs = Mat::zeros(weights.dim());
        let mut coeff = S::one();
        for (n, gn) in g.iter().enumerate() {
            if n > 0 {
                coeff = coeff * t.clone() / S::from_i64(n as i64);
            }
            lhs = &lhs + &gn.scale(&coeff);
        }
        let scalar = (x.clone() * t.clone()).exp()? * phi_gf_closed(fam, y, t)?;
        let rhs = cos_r_squared(t, weights, Truncation::Tolerance(series_tol::<S>()))?.scale(&scalar);
        pairs.push((lhs, rhs));
    }
    Ok(finish_gf("gf-exponential", n_max, ts, pairs))
}

/// Truncated ordinary generating function of the two-variable λ-matrix
/// polynomials against `(1 − yt)⁻¹·e₀(xt/(1 − yt); R)`.
pub fn verify_ogf<S: Scalar>(
    n_max: usize,
    x: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    ts: &[S],
) -> Result<GfReport> {
    let lam: Vec<Mat<S>> = (0..=n_max).map(|n| lambda_matrix_2var(n, x, y, weights)).collect::<Result<_>>()?;
    let trunc = if S::EXACT { Truncation::Terms(4 * n_max + 40) } else { Truncation::Tolerance(series_tol::<S>()) };
    let mut pairs = Vec::new();
    for t in ts {
        let mut lhs = Mat::zeros(weights.dim());
        let mut tn = S::one();
        for ln in &lam {
            lhs = &lhs + &ln.scale(&tn);
            tn = tn * t.clone();
        }
        let denom = S::one() - y.clone() * t.clone();
        if denom.is_zero() {
            return Err(Error::DivergenceRegion { modulus: 1.0 });
        }
        let rhs = e0_series(&(x.clone() * t.clone() / denom.clone()), weights, trunc)?.scale(&(S::one() / denom));
        pairs.push((lhs, rhs));
    }
    Ok(finish_gf("gf-ordinary", n_max, ts, pairs))
}
