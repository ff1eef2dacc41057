//! Bivariate orthogonal polynomials in conjugate complex variables generated
//! by near-banded Toeplitz centrohermitian pencils, and the Gaussian cubature
//! rules built from their common zeros.
//!
//! Everything is generic over [`Scalar`]: [`GaussRat`] gives rounding-free
//! Gaussian-rational arithmetic for identity checks, `Complex64` is used for
//! the eigenvalue work.

pub mod charpoly;
pub mod cubature;
pub mod error;
pub mod families;
pub mod matrix;
pub mod moments;
pub mod poly;
pub mod scalar;

pub use charpoly::{q_via_determinant, CharPencil, IndexSet, UnitShift};
pub use cubature::{build_rule, CubatureRule, JacobiPair, Tolerances};
pub use error::{Error, Result};
pub use families::{FamilyKind, PolyFamily, ThreeTermCoeffs};
pub use matrix::CMatrix;
pub use moments::{GramSequence, MomentTable, ParamRegime};
pub use num_complex::Complex64;
pub use poly::BivarPoly;
pub use scalar::{GaussRat, Scalar};
