//! Numerical verification engine for elliptic determinant transformations.
//!
//! The crate evaluates both sides of a family of theta-function determinant
//! identities over randomly sampled constrained parameters at arbitrary
//! precision and certifies the residuals:
//!
//! - the elliptic Jackson summation and Warnaar's determinant evaluation,
//! - a determinant transformation for elliptic shifted-factorial ratios
//!   with balanced parameters, its column-reversed form and the full S3
//!   orbit of equivalent expressions,
//! - the triangular matrix factorization underlying the transformation,
//! - a trigonometric (p = 0) determinant transformation, and
//! - a multi-dimensional summation identity together with its
//!   permutation-vanishing specialization.
//!
//! Layers: [`numeric`] (precision policy, complex scalars), [`theta`]
//! (theta products, series oracle, shifted factorials), [`linalg`] (small
//! dense determinants), [`identities`] (one evaluator per identity),
//! [`symmetry`] (the S3 action on parameters), [`sampling`] (seeded
//! constrained parameter generation) and [`campaign`] (batch runs and
//! machine-readable reports, surfaced by the `elldet` binary).

pub mod campaign;
pub mod error;
pub mod identities;
pub mod linalg;
pub mod numeric;
pub mod sampling;
pub mod symmetry;
pub mod theta;

pub use error::{Error, Result};
pub use numeric::{rel_residual, CScalar, PrecisionContext};
pub use theta::EllipticBase;

