use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    dim: usize,
    data: Vec<S>,
}

pub type CMatrix = Mat<Complex64>;

impl<S: Scalar> Mat<S> {
    pub fn new(dim: usize, data: Vec<S>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("matrix dimension must be at least 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            data.extend(row);
        }
        Self::new(dim, data)
    }

    pub fn scalar(value: S) -> Self {
        Self { dim: 1, data: vec![value] }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![S::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![S::one(); dim])
    }

    pub fn diag(values: &[S]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (i, v) in values.iter().enumerate() {
            m.data[i * dim + i] = v.clone();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: S) {
        self.data[i * self.dim + j] = value;
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[S]> {
        self.data.chunks(self.dim)
    }

    /// The single entry of a 1x1 matrix.
    pub fn as_scalar(&self) -> Option<&S> {
        (self.dim == 1).then(|| &self.data[0])
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> Mat<T> {
        Mat { dim: self.dim, data: self.data.iter().map(f).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.magnitude().powi(2)).sum::<f64>().sqrt()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn to_complex64(&self) -> CMatrix {
        self.map(Scalar::to_complex64)
    }
}

impl<S: Scalar> Add for &Mat<S> {
    type Output = Mat<S>;
    fn add(self, rhs: &Mat<S>) -> Mat<S> {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Mat { dim: self.dim, data }
    }
}

impl<S: Scalar> Sub for &Mat<S> {
    type Output = Mat<S>;
    fn sub(self, rhs: &Mat<S>) -> Mat<S> {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Mat { dim: self.dim, data }
    }
}

impl<S: Scalar> Mul for &Mat<S> {
    type Output = Mat<S>;
    fn mul(self, rhs: &Mat<S>) -> Mat<S> {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let n = self.dim;
        if n == 1 {
            return Mat::scalar(self.data[0].clone() * rhs.data[0].clone());
        }
        let mut data = vec![S::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &rhs.data[k * n + j];
                    data[i * n + j] = data[i * n + j].clone() + a.clone() * b.clone();
                }
            }
        }
        Mat { dim: n, data }
    }
}

impl<S: Scalar> Add for Mat<S> {
    type Output = Mat<S>;
    fn add(self, rhs: Mat<S>) -> Mat<S> {
        &self + &rhs
    }
}

impl<S: Scalar> Sub for Mat<S> {
    type Output = Mat<S>;
    fn sub(self, rhs: Mat<S>) -> Mat<S> {
        &self - &rhs
    }
}

impl<S: Scalar> Neg for Mat<S> {
    type Output = Mat<S>;
    fn neg(self) -> Mat<S> {
        Mat { dim: self.dim, data: self.data.into_iter().map(Neg::neg).collect() }
    }
}

/// Determinant of a scalar matrix by Gaussian elimination. Rows whose pivot
/// column entry is already zero are skipped, so Hessenberg-shaped inputs cost
/// O(n^2) eliminations.
pub fn determinant<S: Scalar>(mut rows: Vec<Vec<S>>) -> S {
    let n = rows.len();
    let mut det = S::one();
    for col in 0..n {
        let mut pivot: Option<usize> = None;
        let mut best = -1.0f64;
        for (r, row) in rows.iter().enumerate().skip(col) {
            if row[col].is_zero() {
                continue;
            }
            let m = row[col].magnitude();
            if pivot.is_none() || m > best {
                pivot = Some(r);
                best = m;
            }
        }
        let Some(p) = pivot else {
            return S::zero();
        };
        if p != col {
            rows.swap(p, col);
            det = -det;
        }
        let pivot_value = rows[col][col].clone();
        det = det * pivot_value.clone();
        for r in col + 1..n {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].clone() / pivot_value.clone();
            for c in col + 1..n {
                if rows[col][c].is_zero() {
                    continue;
                }
                let update = factor.clone() * rows[col][c].clone();
                rows[r][c] = rows[r][c].clone() - update;
            }
            rows[r][col] = S::zero();
        }
    }
    det
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    let n = m.dim();
    let mut a: Vec<Complex64> = m.data().to_vec();
    let mut inv = CMatrix::identity(n).data;
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))?;
        if a[p * n + col].norm() <= 1e-300 * scale {
            return None;
        }
        if p != col {
            for j in 0..n {
                a.swap(p * n + j, col * n + j);
                inv.swap(p * n + j, col * n + j);
            }
        }
        let pivot = a[col * n + col];
        for j in 0..n {
            a[col * n + j] /= pivot;
            inv[col * n + j] /= pivot;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r * n + col];
            if factor == Complex64::zero() {
                continue;
            }
            for j in 0..n {
                let (ac, ic) = (a[col * n + j], inv[col * n + j]);
                a[r * n + j] -= factor * ac;
                inv[r * n + j] -= factor * ic;
            }
        }
    }
    Some(Mat { dim: n, data: inv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::One;

    fn r(p: i64) -> BigRational {
        BigRational::from_integer(p.into())
    }

    #[test]
    fn determinant_exact_small_cases() {
        let m = vec![vec![r(2), r(1)], vec![r(1), r(2)]];
        assert_eq!(determinant(m), r(3));
        let singular = vec![vec![r(1), r(2)], vec![r(2), r(4)]];
        assert_eq!(determinant(singular), r(0));
        let needs_swap = vec![vec![r(0), r(1)], vec![r(1), r(0)]];
        assert_eq!(determinant(needs_swap), r(-1));
        assert_eq!(determinant::<BigRational>(vec![]), r(1));
    }

    #[test]
    fn inverse_roundtrip() {
        let m = CMatrix::from_rows(vec![
            vec![Complex64::new(2.0, 1.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(0.5, 0.0), Complex64::new(3.0, -1.0)],
        ])
        .unwrap();
        let inv = inverse(&m).unwrap();
        let err = (&(&m * &inv) - &CMatrix::identity(2)).frobenius_norm();
        assert!(err < 1e-14);
        let singular = CMatrix::from_rows(vec![vec![Complex64::one(); 2]; 2]).unwrap();
        assert!(inverse(&singular).is_none());
    }

    #[test]
    fn constructor_validates_shape() {
        assert!(Mat::<BigRational>::new(0, vec![]).is_err());
        assert!(Mat::new(2, vec![r(1); 3]).is_err());
        assert!(Mat::from_rows(vec![vec![r(1), r(2)], vec![r(3)]]).is_err());
    }
}
