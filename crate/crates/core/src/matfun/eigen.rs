use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};

use super::matrix::{inverse, CMatrix};
use crate::error::{Error, Result};

/// Condition estimate above which a matrix is treated as non-diagonalizable.
pub const DEFECTIVE_THRESHOLD: f64 = 1e8;

/// Default bound on `‖P·P⁻¹ − I‖_F` and on the relative reconstruction error.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct EigSystem {
    pub eigenvalues: Vec<Complex64>,
    pub vectors: CMatrix,
    pub inverse: CMatrix,
    /// `‖P‖_F·‖P⁻¹‖_F / N`; equals 1 for a unitary eigenvector matrix.
    pub condition: f64,
}

impl EigSystem {
    /// `P·diag(f(w))·P⁻¹`.
    pub fn apply(&self, f: impl Fn(Complex64) -> Complex64) -> CMatrix {
        self.try_apply(|w| Ok(f(w))).expect("infallible")
    }

    pub fn try_apply(&self, f: impl Fn(Complex64) -> Result<Complex64>) -> Result<CMatrix> {
        let values = self.eigenvalues.iter().map(|&w| f(w)).collect::<Result<Vec<_>>>()?;
        Ok(self.with_diagonal(&values))
    }

    pub fn with_diagonal(&self, values: &[Complex64]) -> CMatrix {
        let n = self.eigenvalues.len();
        if n == 1 {
            return CMatrix::scalar(values[0]);
        }
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::zero();
                for (k, v) in values.iter().enumerate() {
                    acc += self.vectors.get(i, k) * v * self.inverse.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Same decomposition with eigenpairs listed in the order `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.eigenvalues.len();
        assert_eq!(perm.len(), n, "permutation length");
        let mut vectors = CMatrix::zeros(n);
        let mut inv = CMatrix::zeros(n);
        for (new, &old) in perm.iter().enumerate() {
            for i in 0..n {
                vectors.set(i, new, *self.vectors.get(i, old));
                inv.set(new, i, *self.inverse.get(old, i));
            }
        }
        Self {
            eigenvalues: perm.iter().map(|&k| self.eigenvalues[k]).collect(),
            vectors,
            inverse: inv,
            condition: self.condition,
        }
    }
}

fn noise_floor(r: &CMatrix) -> f64 {
    64.0 * f64::EPSILON * r.frobenius_norm().max(f64::MIN_POSITIVE)
}

fn check_finite(r: &CMatrix) -> Result<()> {
    if r.data().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

/// Complex Schur form `R = Q·T·Q*`.
fn schur(r: &CMatrix) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let n = r.dim();
    let m = DMatrix::from_fn(n, n, |i, j| *r.get(i, j));
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Unsupported("Schur iteration did not converge".into()))?;
    Ok(schur.unpack())
}

fn snap(z: Complex64, floor: f64) -> Complex64 {
    let re = if z.re.abs() <= floor { 0.0 } else { z.re };
    let im = if z.im.abs() <= floor { 0.0 } else { z.im };
    Complex64::new(re, im)
}

fn by_re_im(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Eigenvalues sorted by (Re, Im), with parts below the rounding floor
/// flushed to zero so the order does not depend on noise.
pub fn eigenvalues(r: &CMatrix) -> Result<Vec<Complex64>> {
    check_finite(r)?;
    if r.dim() == 1 {
        return Ok(vec![*r.get(0, 0)]);
    }
    let floor = noise_floor(r);
    let (_, t) = schur(r)?;
    let mut values: Vec<Complex64> = (0..r.dim()).map(|i| snap(t[(i, i)], floor)).collect();
    values.sort_by(by_re_im);
    Ok(values)
}

/// Accepts `r` only if every eigenvalue has strictly positive real part.
/// Real parts at rounding level count as zero and are rejected. Of several
/// offenders the one with the smallest real part is reported, taking the
/// upper-half-plane member of a conjugate pair.
pub fn check_positive_stable(r: &CMatrix) -> Result<Vec<Complex64>> {
    let values = eigenvalues(r)?;
    let offender = values
        .iter()
        .filter(|w| w.re <= 0.0)
        .min_by(|a, b| a.re.total_cmp(&b.re).then(b.im.total_cmp(&a.im)));
    match offender {
        Some(&eigenvalue) => Err(Error::NotPositiveStable { eigenvalue }),
        None => Ok(values),
    }
}

pub fn eig_decompose(r: &CMatrix, tol: f64) -> Result<EigSystem> {
    check_finite(r)?;
    let n = r.dim();
    if n == 1 {
        let one = CMatrix::scalar(Complex64::one());
        return Ok(EigSystem { eigenvalues: vec![*r.get(0, 0)], vectors: one.clone(), inverse: one, condition: 1.0 });
    }
    let floor = noise_floor(r);
    let (q, t) = schur(r)?;
    let scale = r.frobenius_norm().max(f64::MIN_POSITIVE);

    // Eigenvectors of the triangular factor by back-substitution.
    let mut pairs: Vec<(Complex64, Vec<Complex64>)> = Vec::with_capacity(n);
    for k in 0..n {
        let w = t[(k, k)];
        let mut v = vec![Complex64::zero(); n];
        v[k] = Complex64::one();
        for i in (0..k).rev() {
            let num: Complex64 = (i + 1..=k).map(|m| t[(i, m)] * v[m]).sum();
            let mut den = t[(i, i)] - w;
            if den.norm() <= floor {
                if num.norm() <= floor {
                    continue;
                }
                den = Complex64::new(f64::EPSILON * scale, 0.0);
            }
            v[i] = -num / den;
        }
        let x: Vec<Complex64> = (0..n).map(|i| (0..n).map(|m| q[(i, m)] * v[m]).sum()).collect();
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        pairs.push((snap(w, floor), x.into_iter().map(|z| z / norm).collect()));
    }
    pairs.sort_by(|a, b| by_re_im(&a.0, &b.0));

    let mut vectors = CMatrix::zeros(n);
    for (col, (_, x)) in pairs.iter().enumerate() {
        for (row, z) in x.iter().enumerate() {
            vectors.set(row, col, *z);
        }
    }
    let inv = inverse(&vectors).ok_or(Error::Defective { condition: f64::INFINITY })?;
    let condition = vectors.frobenius_norm() * inv.frobenius_norm() / n as f64;
    if !condition.is_finite() || condition > DEFECTIVE_THRESHOLD {
        return Err(Error::Defective { condition });
    }
    let sys = EigSystem { eigenvalues: pairs.into_iter().map(|(w, _)| w).collect(), vectors, inverse: inv, condition };

    let id_err = (&(&sys.vectors * &sys.inverse) - &CMatrix::identity(n)).frobenius_norm();
    let rebuilt = sys.with_diagonal(&sys.eigenvalues);
    let rec_err = (&rebuilt - r).frobenius_norm() / scale;
    if id_err > tol * condition || rec_err > tol * condition {
        return Err(Error::Defective { condition });
    }
    Ok(sys)
}
