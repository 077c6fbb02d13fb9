//! Roots of scalar-coefficient polynomials and the zero/surface datasets built
//! on them.
//!
//! Roots come from simultaneous Aberth–Ehrlich iteration in multiprecision,
//! seeded on the circles given by the Newton polygon of the coefficient
//! magnitudes. The polynomials of interest have coefficients spread over
//! dozens of orders of magnitude, which is why hardware doubles are not used.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::sync::Arc;

use dashu_int::IBig;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::families::PhiFamily;
use crate::lambda::{lambda2v_series, to_xpoly};
use crate::matfun::{CMatrix, EigenWeights, ExactWeights, GammaWeights, MpWeights};
use crate::mp::{self, float_from_f64, log2_magnitude, MpComplex, MpFloat};
use crate::qlambda::{q_hermite_lambda, q_to_xpoly, QContext, QEigenWeights, QExactWeights};
use crate::scalar::{as_small_integer, rational_to_f64, Scalar};

/// Residual bound every accepted root must meet.
pub const RESIDUAL_BOUND: f64 = 1e-8;

/// Escalation stops here.
pub const MAX_BITS: usize = 2048;

const MAX_ITERATIONS: usize = 4000;

/// `|Im z| ≤ REAL_THRESHOLD·max(1, |Re z|)` counts as real.
pub const REAL_THRESHOLD: f64 = 1e-8;

pub fn default_bits(n: usize) -> usize {
    if n > 30 {
        256
    } else {
        128
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSet {
    pub n: usize,
    pub bits: usize,
    /// Sorted by `(Re, Im)` (see `cmp_roots`), repeated according to multiplicity.
    pub roots: Vec<MpComplex>,
    /// `|p(z)| / (‖c‖₂·max(1,|z|)ⁿ)` per root.
    pub residuals: Vec<f64>,
}

impl ZeroSet {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn roots_f64(&self) -> Vec<Complex64> {
        self.roots.iter().map(Scalar::to_complex64).collect()
    }

    pub fn real_roots(&self) -> Vec<f64> {
        self.roots_f64().into_iter().filter(|z| is_real(*z)).map(|z| z.re).collect()
    }
}

pub fn is_real(z: Complex64) -> bool {
    z.im.abs() <= REAL_THRESHOLD * z.re.abs().max(1.0)
}

fn horner(c: &[MpComplex], z: &MpComplex) -> (MpComplex, MpComplex) {
    let n = c.len() - 1;
    let mut p = c[n].clone();
    let mut d = MpComplex::zero();
    for k in (0..n).rev() {
        d = d * z.clone() + p.clone();
        p = p * z.clone() + c[k].clone();
    }
    (p, d)
}

/// Orders by the double-precision images first so that a conjugate pair
/// (whose real parts agree to working precision) always lists `−Im` first.
fn cmp_roots(a: &MpComplex, b: &MpComplex) -> Ordering {
    let (x, y) = (a.to_complex64(), b.to_complex64());
    x.re.total_cmp(&y.re)
        .then(x.im.total_cmp(&y.im))
        .then(a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal))
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

/// `2^e` for any finite `e`, at `bits` precision.
fn pow2(e: f64, bits: usize) -> MpFloat {
    let whole = e.floor();
    let frac = float_from_f64(2f64.powf(e - whole), bits);
    frac * MpFloat::from_parts(IBig::ONE, whole as isize)
}

/// Starting points on the circles of the upper Newton polygon of
/// `(k, log2|c_k|)`; each edge of horizontal length `m` contributes `m`
/// points spread evenly on a circle whose radius makes its two end terms
/// equal in magnitude.
fn initial_guesses(logs: &[f64], bits: usize) -> Vec<MpComplex> {
    let degree = logs.len() - 1;
    let mut hull: Vec<usize> = Vec::new();
    for k in (0..=degree).filter(|&k| logs[k].is_finite()) {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b - a) as f64 * (logs[k] - logs[a]) - (k - a) as f64 * (logs[b] - logs[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let mut out = Vec::with_capacity(degree);
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        let count = j - i;
        let log_r = (logs[i] - logs[j]) / count as f64;
        let radius = pow2(log_r, bits);
        for t in 0..count {
            let theta = 2.0 * PI * t as f64 / count as f64 + 2.0 * PI * i as f64 / degree as f64 + 0.4;
            let (s, c) = theta.sin_cos();
            out.push(MpComplex::new(&radius * float_from_f64(c, bits), &radius * float_from_f64(s, bits)));
        }
    }
    out
}

/// `log2(Σ_k |c_k|·|z|^k)` from per-coefficient logs.
fn log2_abs_poly(logs: &[f64], log_z: f64) -> f64 {
    let terms: Vec<f64> = logs.iter().enumerate().filter(|(_, l)| l.is_finite()).map(|(k, l)| l + k as f64 * log_z).collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp2()).sum::<f64>().log2()
}

/// Aberth–Ehrlich on a polynomial with `c[0] ≠ 0`.
fn aberth(c: &[MpComplex], bits: usize) -> Vec<MpComplex> {
    let degree = c.len() - 1;
    if degree == 0 {
        return Vec::new();
    }
    let logs: Vec<f64> = c.iter().map(MpComplex::log2_abs).collect();
    let mut z = initial_guesses(&logs, bits);
    let mut done = vec![false; degree];
    let eps_log = 4.0 - bits as f64;
    let floor_log = z.iter().map(MpComplex::log2_abs).fold(f64::INFINITY, f64::min) - 16.0;
    let guard = (4.0 * degree as f64).log2();
    let one = MpComplex::one();
    for _ in 0..MAX_ITERATIONS {
        for i in 0..degree {
            if done[i] {
                continue;
            }
            let (p, d) = horner(c, &z[i]);
            let log_z = z[i].log2_abs();
            if p.is_zero() || p.log2_abs() <= log2_abs_poly(&logs, log_z) + guard + eps_log - 4.0 {
                done[i] = true;
                continue;
            }
            let mut s = MpComplex::zero();
            for j in 0..degree {
                if j != i {
                    s = s + one.clone() / (z[i].clone() - z[j].clone());
                }
            }
            let step = if d.is_zero() {
                // Stationary point: a plain repulsive step still makes progress.
                one.clone() / s
            } else {
                let ratio = p / d;
                ratio.clone() / (one.clone() - ratio * s)
            };
            z[i] = z[i].clone() - step.clone();
            if step.log2_abs() <= z[i].log2_abs().max(floor_log) + eps_log {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            break;
        }
    }
    z
}

/// All roots of `Σ c_k x^k`, with multiplicity, at `bits` of precision.
pub fn roots(coeffs: &[MpComplex], bits: usize) -> Result<ZeroSet> {
    let Some(lead) = coeffs.last() else {
        return Err(Error::DegenerateLeadingCoefficient);
    };
    if lead.is_zero() {
        return Err(Error::DegenerateLeadingCoefficient);
    }
    let n = coeffs.len() - 1;
    let c: Vec<MpComplex> = coeffs.iter().map(|v| v.clone().with_precision(bits)).collect();
    let zero_roots = c.iter().take_while(|v| v.is_zero()).count();
    let mut found = aberth(&c[zero_roots..], bits);
    found.extend(std::iter::repeat_n(MpComplex::zero(), zero_roots));
    found.sort_by(cmp_roots);

    let norm_log = log2_magnitude(&c.iter().fold(MpFloat::ZERO, |acc, v| acc + v.norm_sqr())) / 2.0;
    let residuals: Vec<f64> = found
        .iter()
        .map(|z| {
            let (p, _) = horner(&c, z);
            if p.is_zero() {
                return 0.0;
            }
            (p.log2_abs() - norm_log - n as f64 * z.log2_abs().max(0.0)).exp2()
        })
        .collect();
    let set = ZeroSet { n, bits, roots: found, residuals };
    let worst = set.max_residual();
    if worst > RESIDUAL_BOUND || worst.is_nan() {
        return Err(Error::PrecisionInsufficient { bits, residual: worst });
    }
    Ok(set)
}

pub fn roots_rational(coeffs: &[BigRational], bits: usize) -> Result<ZeroSet> {
    let c: Vec<MpComplex> = coeffs.iter().map(|r| MpComplex::from_rational_bits(r, bits)).collect();
    roots(&c, bits)
}

/// Retries with doubled precision while the residual bound is unmet.
pub fn with_escalation(start_bits: usize, mut attempt: impl FnMut(usize) -> Result<ZeroSet>) -> Result<ZeroSet> {
    let mut bits = start_bits;
    loop {
        match attempt(bits) {
            Err(Error::PrecisionInsufficient { .. }) if bits * 2 <= MAX_BITS => bits *= 2,
            other => return other,
        }
    }
}

/// Which polynomial family a zero dataset is drawn from.
#[derive(Clone, Debug)]
pub enum ZeroSource {
    Classical { fam: PhiFamily, r: BigRational, y: BigRational },
    /// q-Hermite λ-matrix polynomials; `r` must be a positive integer.
    QHermite { r: u64, y: BigRational, q: BigRational },
}

impl ZeroSource {
    /// Coefficients `c_0 … c_n` at `bits` of precision. Integer parameters
    /// are handled in exact rationals and rounded once.
    pub fn coefficients(&self, n: usize, bits: usize) -> Result<Vec<MpComplex>> {
        match self {
            ZeroSource::Classical { fam, r, y } => {
                check_positive(r)?;
                if let Some(ri) = as_small_integer(r) {
                    let w = ExactWeights::new(ri as u64)?;
                    let p = to_xpoly(n, y, &w, fam)?;
                    Ok(rational_coeffs(&p.scalar_coeffs().expect("scalar"), bits))
                } else {
                    mp::with_precision(bits + 32, || {
                        let w = MpWeights::new(r.clone(), bits + 32)?;
                        let p = to_xpoly(n, &MpComplex::from_rational(y), &w, fam)?;
                        Ok(p.scalar_coeffs().expect("scalar").into_iter().map(|v| v.with_precision(bits)).collect())
                    })
                }
            }
            ZeroSource::QHermite { r, y, q } => {
                let ctx = Arc::new(QContext::<BigRational>::from_rational(q)?);
                let w = QExactWeights::new(*r, ctx.clone())?;
                let p = q_to_xpoly(n as u64, y, &w, &ctx)?;
                Ok(rational_coeffs(&p.scalar_coeffs().expect("scalar"), bits))
            }
        }
    }

    /// Zeros of the degree-`n` member, escalating precision as needed.
    pub fn zero_set(&self, n: usize, bits: Option<usize>) -> Result<ZeroSet> {
        if n == 0 {
            return Ok(ZeroSet { n, bits: bits.unwrap_or(default_bits(0)), roots: Vec::new(), residuals: Vec::new() });
        }
        with_escalation(bits.unwrap_or(default_bits(n)), |b| roots(&self.coefficients(n, b)?, b))
    }
}

fn check_positive(r: &BigRational) -> Result<()> {
    if *r <= BigRational::zero() {
        return Err(Error::NotPositiveStable { eigenvalue: Complex64::new(rational_to_f64(r), 0.0) });
    }
    Ok(())
}

fn rational_coeffs(c: &[BigRational], bits: usize) -> Vec<MpComplex> {
    c.iter().map(|r| MpComplex::from_rational_bits(r, bits)).collect()
}

pub fn zeros_of_lambda(fam: &PhiFamily, n: usize, r: &BigRational, y: &BigRational, bits: Option<usize>) -> Result<ZeroSet> {
    ZeroSource::Classical { fam: fam.clone(), r: r.clone(), y: y.clone() }.zero_set(n, bits)
}

pub fn zeros_of_q_lambda(n: usize, r: u64, y: &BigRational, q: &BigRational, bits: Option<usize>) -> Result<ZeroSet> {
    ZeroSource::QHermite { r, y: y.clone(), q: q.clone() }.zero_set(n, bits)
}

/// One zero set per `n`, computed in parallel, returned in order of `n`.
pub fn zero_stacks(source: &ZeroSource, ns: &[usize], bits: Option<usize>) -> Result<Vec<ZeroSet>> {
    ns.par_iter().map(|&n| source.zero_set(n, bits)).collect()
}

/// `(n, x)` for every real zero, ordered by `n` then `x`.
pub fn real_zeros_table(source: &ZeroSource, ns: &[usize], bits: Option<usize>) -> Result<Vec<(usize, f64)>> {
    Ok(zero_stacks(source, ns, bits)?
        .into_iter()
        .flat_map(|set| {
            let n = set.n;
            set.real_roots().into_iter().map(move |x| (n, x))
        })
        .collect())
}

/// Groups roots closer than `rel·max(1, max|z|)`; returns centroid and
/// multiplicity, ordered by centroid `(Re, Im)`.
pub fn cluster_roots(roots: &[Complex64], rel: f64) -> Vec<(Complex64, usize)> {
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut parent: Vec<usize> = (0..roots.len()).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if (roots[i] - roots[j]).norm() < rel * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<(Complex64, usize)> = Vec::new();
    let mut index: Vec<Option<usize>> = vec![None; roots.len()];
    for i in 0..roots.len() {
        let root = find(&mut parent, i);
        match index[root] {
            Some(g) => {
                groups[g].0 += roots[i];
                groups[g].1 += 1;
            }
            None => {
                index[root] = Some(groups.len());
                groups.push((roots[i], 1));
            }
        }
    }
    let mut out: Vec<(Complex64, usize)> = groups.into_iter().map(|(s, m)| (s / m as f64, m)).collect();
    out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    out
}

/// Closed interval sampled at `points` evenly spaced values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(start: f64, end: f64, points: usize) -> Result<Self> {
        if points == 0 || !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidInput(format!("bad axis {start}:{end} with {points} points")));
        }
        Ok(Self { start, end, points })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|i| if i + 1 == self.points { self.end } else { self.start + step * i as f64 }).collect()
    }
}

#[derive(Clone, Debug)]
pub enum SurfaceSource {
    Classical { fam: PhiFamily, r: BigRational },
    QHermite { r: BigRational, q: BigRational },
}

/// `(x, y, value)` over the grid, `x` varying slowest. Values are the real
/// parts; they are real whenever the inputs are.
pub fn surface_grid(source: &SurfaceSource, n: usize, xs: Axis, ys: Axis) -> Result<Vec<(f64, f64, f64)>> {
    let points: Vec<(f64, f64)> = xs.values().into_iter().flat_map(|x| ys.values().into_iter().map(move |y| (x, y))).collect();
    let c = |v: f64| Complex64::new(v, 0.0);
    let eval: Box<dyn Fn(f64, f64) -> Result<f64> + Sync> = match source {
        SurfaceSource::Classical { fam, r } => {
            check_positive(r)?;
            let weights: Box<dyn GammaWeights<Complex64>> = match as_small_integer(r) {
                Some(ri) => Box::new(ExactWeights::new(ri as u64)?),
                None => Box::new(EigenWeights::new(&CMatrix::scalar(c(rational_to_f64(r))))?),
            };
            let fam = fam.clone();
            Box::new(move |x, y| Ok(lambda2v_series(n, &c(x), &c(y), weights.as_ref(), &fam)?.get(0, 0).re))
        }
        SurfaceSource::QHermite { r, q } => {
            check_positive(r)?;
            let ctx = Arc::new(QContext::<Complex64>::from_rational(q)?);
            let weights: Box<dyn GammaWeights<Complex64>> = match as_small_integer(r) {
                Some(ri) => Box::new(QExactWeights::new(ri as u64, ctx.clone())?),
                None => Box::new(QEigenWeights::new(&CMatrix::scalar(c(rational_to_f64(r))), rational_to_f64(q))?),
            };
            Box::new(move |x, y| Ok(q_hermite_lambda(n as u64, &c(x), &c(y), weights.as_ref(), &ctx)?.get(0, 0).re))
        }
    };
    points.par_iter().map(|&(x, y)| Ok((x, y, eval(x, y)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn ints(cs: &[i64]) -> Vec<BigRational> {
        cs.iter().map(|&c| q(c, 1)).collect()
    }

    #[test]
    fn simple_quadratic() {
        let set = roots_rational(&ints(&[-1, 0, 1]), 128).unwrap();
        let r = set.roots_f64();
        assert_eq!(r.len(), 2);
        assert!((r[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-30);
        assert!((r[1] - Complex64::new(1.0, 0.0)).norm() < 1e-30);
    }

    #[test]
    fn zero_root_with_multiplicity() {
        let set = roots_rational(&ints(&[0, 0, 0, 1]), 128).unwrap();
        assert_eq!(set.roots.len(), 3);
        assert!(set.roots.iter().all(|z| z.is_zero()));
        assert_eq!(set.max_residual(), 0.0);
    }

    #[test]
    fn repeated_nonzero_root_clusters() {
        // (x − 1)³ (x + 2)
        let set = roots_rational(&ints(&[-2, 5, -3, -1, 1]), 128).unwrap();
        let clusters = cluster_roots(&set.roots_f64(), 1e-6);
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0].1, 1);
        assert!((clusters[0].0.re + 2.0).abs() < 1e-12);
        assert_eq!(clusters[1].1, 3);
        assert!((clusters[1].0.re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_leading_coefficient() {
        assert_eq!(roots_rational(&ints(&[1, 2, 0]), 128), Err(Error::DegenerateLeadingCoefficient));
    }

    #[test]
    fn linear_truncated_exponential() {
        let set = zeros_of_lambda(&PhiFamily::TruncatedExp, 1, &q(1, 1), &q(1, 1), None).unwrap();
        let z = set.roots_f64()[0];
        assert!((z.re + 5.0 / 6.0).abs() < 1e-15 && z.im == 0.0);
        let empty = zeros_of_lambda(&PhiFamily::TruncatedExp, 0, &q(1, 1), &q(1, 1), None).unwrap();
        assert!(empty.roots.is_empty());
    }

    #[test]
    fn axis_endpoints_are_exact() {
        let a = Axis::new(-1.0, 2.0, 4).unwrap();
        assert_eq!(a.values(), vec![-1.0, 0.0, 1.0, 2.0]);
        assert_eq!(Axis::new(3.0, 5.0, 1).unwrap().values(), vec![3.0]);
    }
}
