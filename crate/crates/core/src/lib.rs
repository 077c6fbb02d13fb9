//! Two-variable general λ-matrix polynomials.
//!
//! The crate builds these polynomials four independent ways (explicit series,
//! convolution with the one-variable λ-matrix polynomials, umbral evaluation,
//! and a determinant form) so that each construction can serve as an oracle
//! for the others. It also carries their q-deformed counterparts and the root
//! finder used to produce zero datasets.

pub mod error;
pub mod families;
pub mod lambda;
pub mod matfun;
pub mod mp;
pub mod qlambda;
pub mod scalar;
pub mod umbral;
pub mod zeros;

pub use error::{Error, Result};
