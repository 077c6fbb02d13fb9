//! Dense complex matrices, eigendecomposition and the gamma-ratio weights.

mod eigen;
mod gamma;
mod matrix;
mod weights;

pub use eigen::{
    check_positive_stable, eig_decompose, eigenvalues, EigSystem, DEFECTIVE_THRESHOLD, RECONSTRUCTION_TOL,
};
pub use gamma::{complex_log_gamma, ln_gamma_real};
pub use matrix::{determinant, inverse, CMatrix, Mat};
pub use weights::{
    gamma_weight, gamma_weight_exact, scalar_gamma_ratio, EigenWeights, ExactWeights, GammaWeights, MpWeights,
};
