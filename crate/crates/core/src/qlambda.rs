//! q-deformed arithmetic and the q-Hermite λ-matrix polynomials.
//!
//! Integer-argument quantities (brackets, factorials, Gaussian binomials,
//! `Γ_q` at positive integers) are generic over the scalar tower, so a
//! rational `q` gives exact results. Non-integer arguments go through the
//! infinite product for `Γ_q` in hardware floats.

use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::families::PhiFamily;
use crate::lambda::{lambda2v_series, VerifyReport, XPoly};
use crate::matfun::{check_positive_stable, eig_decompose, ln_gamma_real, CMatrix, EigSystem, ExactWeights, GammaWeights, Mat, RECONSTRUCTION_TOL};
use crate::matfun::complex_log_gamma;
use crate::scalar::{pow_u, rational_to_f64, signed_unit, Scalar};

/// Holds `q ∈ (0, 1]` and a memo of q-factorials.
#[derive(Debug)]
pub struct QContext<S> {
    q: S,
    classical: bool,
    factorials: RwLock<Vec<S>>,
}

impl<S: Scalar> QContext<S> {
    /// Range check goes through the hardware-float image of `q`; use
    /// [`QContext::from_rational`] when `q` is an exact rational.
    pub fn new(q: S) -> Result<Self> {
        let z = q.to_complex64();
        if z.im != 0.0 || !(z.re > 0.0 && z.re <= 1.0) {
            return Err(Error::InvalidInput(format!("q must lie in (0, 1], got {}", q.to_text())));
        }
        Ok(Self::unchecked(q))
    }

    fn unchecked(q: S) -> Self {
        let classical = q == S::one();
        Self { q, classical, factorials: RwLock::new(vec![S::one()]) }
    }

    pub fn from_rational(q: &BigRational) -> Result<Self> {
        if !(*q > BigRational::zero() && *q <= BigRational::one()) {
            return Err(Error::InvalidInput(format!("q must lie in (0, 1], got {q}")));
        }
        Ok(Self::unchecked(S::from_rational(q)))
    }

    pub fn q(&self) -> &S {
        &self.q
    }

    /// `q = 1`: every q-quantity reduces to its ordinary counterpart.
    pub fn is_classical(&self) -> bool {
        self.classical
    }

    /// `[k]_q = 1 + q + … + q^{k−1}`.
    pub fn bracket(&self, k: u64) -> S {
        if self.classical {
            return S::from_i64(k as i64);
        }
        let mut acc = S::zero();
        for _ in 0..k {
            acc = acc * self.q.clone() + S::one();
        }
        acc
    }

    /// `[k]_q! = [1]_q·[2]_q⋯[k]_q`, memoized.
    pub fn factorial(&self, k: u64) -> S {
        let k = k as usize;
        if let Some(v) = self.factorials.read().expect("q-factorial memo poisoned").get(k) {
            return v.clone();
        }
        let mut table = self.factorials.write().expect("q-factorial memo poisoned");
        while table.len() <= k {
            let m = table.len() as u64;
            let next = table[table.len() - 1].clone() * self.bracket(m);
            table.push(next);
        }
        table[k].clone()
    }
}

/// `[x]_q = (1 − q^x)/(1 − q)` for real `x`; `x` itself at `q = 1`.
pub fn q_bracket_real(x: f64, q: f64) -> f64 {
    if q == 1.0 {
        return x;
    }
    let lq = q.ln();
    (x * lq).exp_m1() / lq.exp_m1()
}

/// `Γ_q(n) = [n−1]_q!` for positive integers `n`.
pub fn q_gamma<S: Scalar>(n: u64, ctx: &QContext<S>) -> Result<S> {
    if n == 0 {
        return Err(Error::NonpositiveArgument(0.0));
    }
    Ok(ctx.factorial(n - 1))
}

const PRODUCT_TERM_CAP: usize = 200_000_000;

/// `ln Γ_q(z) = (1−z)·ln(1−q) + Σ_k [ln(1−q^{k+1}) − ln(1−q^{k+z})]`, summed
/// until a factor differs from 1 by less than 1e−16.
fn ln_q_gamma_product(z: Complex64, q: f64) -> Result<Complex64> {
    let lq = q.ln();
    let mut acc = (1.0 - z) * (-lq.exp_m1()).ln();
    for k in 0..PRODUCT_TERM_CAP {
        let kf = k as f64;
        let num = (-((kf + 1.0) * lq).exp_m1()).ln();
        let w = (kf + z) * lq;
        let qz = w.exp();
        let den = if qz.norm() < 0.5 {
            ln_1p(-qz)
        } else {
            let one_minus = -exp_m1(w);
            if one_minus.norm() < 1e-300 {
                return Err(Error::Pole { z });
            }
            one_minus.ln()
        };
        let term = num - den;
        acc += term;
        if term.norm() < 1e-16 && qz.norm() < 1e-16 * (1.0 - q) {
            return Ok(acc);
        }
    }
    Err(Error::Unsupported(format!("q-gamma product did not settle within {PRODUCT_TERM_CAP} factors")))
}

/// `ln(1 + w)` without cancellation in `1 + w` for small `|w|`.
fn ln_1p(w: Complex64) -> Complex64 {
    let re = (w.re.mul_add(w.re, 2.0 * w.re) + w.im * w.im).ln_1p() / 2.0;
    Complex64::new(re, w.im.atan2(1.0 + w.re))
}

/// `e^w − 1` without cancellation for small `|w|`.
fn exp_m1(w: Complex64) -> Complex64 {
    let s = (w.im / 2.0).sin();
    Complex64::new(w.re.exp_m1() * w.im.cos() - 2.0 * s * s, w.re.exp() * w.im.sin())
}

/// `Γ_q(x)` for real `x > 0`. Integer arguments use the finite product.
pub fn q_gamma_real(x: f64, q: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::NonpositiveArgument(x));
    }
    if q == 1.0 {
        return Ok(ln_gamma_real(x)?.exp());
    }
    if x.fract() == 0.0 && x <= 1e6 {
        let mut acc = 1.0;
        for k in 1..x as u64 {
            acc *= q_bracket_real(k as f64, q);
        }
        return Ok(acc);
    }
    Ok(ln_q_gamma_product(Complex64::new(x, 0.0), q)?.re.exp())
}

/// `ln Γ_q(z)` for `Re z > 0`.
pub fn ln_q_gamma_complex(z: Complex64, q: f64) -> Result<Complex64> {
    if !(z.re > 0.0) {
        return Err(Error::NonpositiveArgument(z.re));
    }
    if q == 1.0 {
        return complex_log_gamma(z);
    }
    ln_q_gamma_product(z, q)
}

/// Gaussian binomial `[n]_q!/([k]_q!·[n−k]_q!)`.
pub fn q_binomial<S: Scalar>(n: u64, k: u64, ctx: &QContext<S>) -> Result<S> {
    if k > n {
        return Err(Error::IndexError { n: n as usize, k: k as usize });
    }
    Ok(ctx.factorial(n) / (ctx.factorial(k) * ctx.factorial(n - k)))
}

/// Full row `C(n,0)_q … C(n,n)_q`.
pub fn q_binomial_row<S: Scalar>(n: u64, ctx: &QContext<S>) -> Vec<S> {
    let top = ctx.factorial(n);
    (0..=n).map(|k| top.clone() / (ctx.factorial(k) * ctx.factorial(n - k))).collect()
}

/// A monomial in the expansion symbols with its coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct QTerm<S> {
    pub exponents: Vec<u32>,
    pub coeff: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QExpansion<S> {
    pub symbols: Vec<String>,
    pub terms: Vec<QTerm<S>>,
}

impl<S: Scalar> QExpansion<S> {
    pub fn coeff(&self, exponents: &[u32]) -> S {
        self.terms.iter().find(|t| t.exponents == exponents).map(|t| t.coeff.clone()).unwrap_or_else(S::zero)
    }
}

impl<S: Scalar> std::fmt::Display for QExpansion<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", t.coeff.to_text())?;
            for (s, e) in self.symbols.iter().zip(&t.exponents) {
                if *e > 0 {
                    write!(f, "·{s}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// `(s₀ ⊕_q s₁)ⁿ` or, for three symbols, `(s₀ ⊕_q (s₁ ⊕_q s₂))ⁿ`, expanded
/// with Gaussian binomials.
pub fn nwa_expand<S: Scalar>(symbols: &[&str], n: u32, ctx: &QContext<S>) -> Result<QExpansion<S>> {
    let mut terms = Vec::new();
    let n64 = n as u64;
    match symbols.len() {
        2 => {
            let row = q_binomial_row(n64, ctx);
            for r in 0..=n {
                terms.push(QTerm { exponents: vec![r, n - r], coeff: row[r as usize].clone() });
            }
        }
        3 => {
            let outer = q_binomial_row(n64, ctx);
            for j in 0..=n {
                let inner = q_binomial_row((n - j) as u64, ctx);
                for k in 0..=n - j {
                    let coeff = outer[j as usize].clone() * inner[k as usize].clone();
                    terms.push(QTerm { exponents: vec![j, k, n - j - k], coeff });
                }
            }
        }
        m => return Err(Error::InvalidInput(format!("q-addition takes 2 or 3 symbols, got {m}"))),
    }
    Ok(QExpansion { symbols: symbols.iter().map(|s| s.to_string()).collect(), terms })
}

/// Vacuum of the q-Hermite symbol: `y^r·[2r]_q!/[r]_q!` at even index `2r`,
/// zero at odd indices.
pub fn q_hermite_vacuum<S: Scalar>(m: u64, y: &S, ctx: &QContext<S>) -> S {
    if m % 2 == 1 {
        return S::zero();
    }
    let r = m / 2;
    pow_u(y, r as u32) * ctx.factorial(m) / ctx.factorial(r)
}

/// `H_{n,q}(x,y) = Σ_k C(n,2k)_q·([2k]_q!/[k]_q!)·y^k·x^{n−2k}`.
pub fn q_hermite<S: Scalar>(n: u64, x: &S, y: &S, ctx: &QContext<S>) -> S {
    let row = q_binomial_row(n, ctx);
    let mut acc = S::zero();
    for m in (0..=n).step_by(2) {
        acc = acc + row[m as usize].clone() * q_hermite_vacuum(m, y, ctx) * pow_u(x, (n - m) as u32);
    }
    acc
}

/// `Γ_q(r+j+1)/Γ_q(2r+2j+1) = [r+j]_q!/[2r+2j]_q!` for a positive integer `r`.
#[derive(Debug, Clone)]
pub struct QExactWeights<S> {
    r: u64,
    ctx: Arc<QContext<S>>,
}

impl<S: Scalar> QExactWeights<S> {
    pub fn new(r: u64, ctx: Arc<QContext<S>>) -> Result<Self> {
        if r == 0 {
            return Err(Error::NotPositiveStable { eigenvalue: Complex64::zero() });
        }
        Ok(Self { r, ctx })
    }

    pub fn context(&self) -> &QContext<S> {
        &self.ctx
    }
}

impl<S: Scalar> GammaWeights<S> for QExactWeights<S> {
    fn dim(&self) -> usize {
        1
    }

    fn weight(&self, j: usize) -> Result<Mat<S>> {
        let a = self.r + j as u64;
        Ok(Mat::scalar(self.ctx.factorial(a) / self.ctx.factorial(2 * a)))
    }
}

/// Matrix q-gamma weights through the eigendecomposition, hardware floats.
#[derive(Debug)]
pub struct QEigenWeights {
    eig: EigSystem,
    q: f64,
}

impl QEigenWeights {
    pub fn new(r: &CMatrix, q: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::InvalidInput(format!("q must lie in (0, 1], got {q}")));
        }
        check_positive_stable(r)?;
        Ok(Self { eig: eig_decompose(r, RECONSTRUCTION_TOL)?, q })
    }
}

impl GammaWeights<Complex64> for QEigenWeights {
    fn dim(&self) -> usize {
        self.eig.eigenvalues.len()
    }

    fn weight(&self, j: usize) -> Result<CMatrix> {
        let j = j as f64;
        self.eig.try_apply(|w| {
            let num = ln_q_gamma_complex(w + (j + 1.0), self.q)?;
            let den = ln_q_gamma_complex(2.0 * w + (2.0 * j + 1.0), self.q)?;
            Ok((num - den).exp())
        })
    }
}

/// `Σ_j C(n,j)_q·(−1)^j·H_{n−j,q}(x,y)·W_j` with `W_j` the q-gamma weights.
pub fn q_hermite_lambda<S: Scalar>(
    n: u64,
    x: &S,
    y: &S,
    weights: &dyn GammaWeights<S>,
    ctx: &QContext<S>,
) -> Result<Mat<S>> {
    let row = q_binomial_row(n, ctx);
    let mut acc = Mat::zeros(weights.dim());
    for j in 0..=n {
        let c = row[j as usize].clone() * signed_unit::<S>(j as usize) * q_hermite(n - j, x, y, ctx);
        acc = &acc + &weights.weight(j as usize)?.scale(&c);
    }
    Ok(acc)
}

/// Coefficients in `x` of [`q_hermite_lambda`].
pub fn q_to_xpoly<S: Scalar>(n: u64, y: &S, weights: &dyn GammaWeights<S>, ctx: &QContext<S>) -> Result<XPoly<S>> {
    let mut coeffs = vec![Mat::zeros(weights.dim()); n as usize + 1];
    let row = q_binomial_row(n, ctx);
    for j in 0..=n {
        let w = weights.weight(j as usize)?;
        let outer = row[j as usize].clone() * signed_unit::<S>(j as usize);
        let inner = q_binomial_row(n - j, ctx);
        for m in (0..=n - j).step_by(2) {
            let c = outer.clone() * inner[m as usize].clone() * q_hermite_vacuum(m, y, ctx);
            let k = (n - j - m) as usize;
            coeffs[k] = &coeffs[k] + &w.scale(&c);
        }
    }
    XPoly::new(coeffs)
}

/// Distance of the q-Hermite λ-matrix polynomials at `q` from the classical
/// Hermite-family values, for `n ≤ n_max`, in exact arithmetic. The report
/// passes when every relative gap is within `tol` and the gap shrinks at
/// least linearly in `1 − q` (measured against `q' = 1 − (1 − q)/10`).
pub fn verify_q_limit(
    n_max: u64,
    x: &BigRational,
    y: &BigRational,
    r: u64,
    q: &BigRational,
    tol: f64,
) -> Result<VerifyReport> {
    let classical = ExactWeights::new(r)?;
    let gap_at = |q: &BigRational| -> Result<Vec<f64>> {
        let ctx = Arc::new(QContext::<BigRational>::from_rational(q)?);
        let weights = QExactWeights::new(r, ctx.clone())?;
        (0..=n_max)
            .map(|n| {
                let deformed = q_hermite_lambda(n, x, y, &weights, &ctx)?;
                let exact = lambda2v_series(n as usize, x, y, &classical, &PhiFamily::Hermite)?;
                let diff = rational_to_f64(&(deformed.get(0, 0).clone() - exact.get(0, 0).clone())).abs();
                let scale = rational_to_f64(exact.get(0, 0)).abs();
                Ok(if diff == 0.0 { 0.0 } else { diff / scale.max(f64::MIN_POSITIVE) })
            })
            .collect()
    };
    let gaps = gap_at(q)?;
    let h = BigRational::one() - q;
    let finer = gap_at(&(BigRational::one() - h.clone() / BigRational::from_integer(10.into())))?;
    let mut order = f64::INFINITY;
    for (a, b) in gaps.iter().zip(&finer) {
        if *a > 0.0 && *b > 0.0 {
            order = order.min((a / b).log10());
        }
    }
    let max_rel = gaps.iter().copied().fold(0.0, f64::max);
    let order_ok = h.is_zero() || order >= 0.9;
    Ok(VerifyReport {
        identity: "q-limit".into(),
        params: Vec::new(),
        max_abs: f64::NAN,
        max_rel,
        pass: max_rel <= tol && order_ok,
        informational: false,
        note: Some(if order.is_finite() {
            format!("measured order in (1-q): {order:.3}")
        } else {
            "gaps vanish identically".into()
        }),
    })
}
