//! Joyce hypercomplex structures on compact homogeneous spaces `G/L`,
//! the invariant HKT metric family, the invariant HKT-Einstein metric, and
//! residual verification of Bismut-connection properties (parallel torsion,
//! parallel curvature, strong HKT).
//!
//! The pipeline runs bottom up:
//!
//! 1. [`lie`] builds root systems with the Killing normalization and a
//!    Cartan-Weyl basis with signed structure constants.
//! 2. [`joyce`] runs the strongly-orthogonal-root decomposition, assembles
//!    the coset space and the invariant hypercomplex structure `(I, J, K)`.
//! 3. [`forms`] provides invariant metrics and forms, the exterior
//!    derivative, and the HKT residual.
//! 4. [`connections`] computes the Chern-Ricci form, the HKT-Einstein
//!    coefficients, and Bismut torsion/curvature diagnostics.

pub mod connections;
pub mod error;
pub mod forms;
pub mod joyce;
pub mod lie;

pub use error::{Error, Result};
