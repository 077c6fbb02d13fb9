use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive stable: eigenvalue {eigenvalue} has non-positive real part")]
    NotPositiveStable { eigenvalue: Complex64 },

    #[error("matrix is numerically defective (eigenvector condition estimate {condition:.3e})")]
    Defective { condition: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("log-gamma pole at z = {z}")]
    Pole { z: Complex64 },

    #[error("umbral degree {degree} exceeds cap {cap}")]
    DegreeCapExceeded { degree: u32, cap: u32 },

    #[error("phi_0(y) vanishes; the reciprocal sequence is undefined")]
    ZeroPhi0,

    #[error("custom family defines phi_n only up to n = {max}, requested n = {n}")]
    FamilyIndexOutOfRange { n: usize, max: usize },

    #[error("generating function diverges: |y*t| = {modulus} >= 1")]
    DivergenceRegion { modulus: f64 },

    #[error("determinant form is limited to n <= {max}, requested n = {n}")]
    CostGuard { n: usize, max: usize },

    #[error("q-gamma requires a positive argument, got {0}")]
    NonpositiveArgument(f64),

    #[error("binomial index out of range: n = {n}, k = {k}")]
    IndexError { n: usize, k: usize },

    #[error("root residual {residual:.3e} exceeds bound at {bits} bits")]
    PrecisionInsufficient { bits: usize, residual: f64 },

    #[error("leading coefficient vanishes")]
    DegenerateLeadingCoefficient,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
