//! Graded triangulations by newest-vertex bisection.
//!
//! The crate builds meshes that equidistribute the H¹ interpolation error of
//! functions with point singularities, and measures what the construction
//! achieves:
//!
//! - [`mesh`]: the bisection forest, `refine`/`complete`, mesh I/O.
//! - [`grading`]: the two-loop grading algorithm and the complexity verifiers.
//! - [`singular`]: singular terms `c (ln r)^k r^γ g(θ) χ(r)`, corner presets,
//!   and the Kellogg checkerboard solution.
//! - [`field`]: smooth regular parts and the combined target function.
//! - [`error_analysis`]: Lagrange interpolation, H¹-seminorm error quadrature,
//!   ring statistics and convergence sweeps.

pub mod error;
pub mod error_analysis;
pub mod field;
pub mod grading;
pub mod mesh;
pub mod singular;

pub use error::{Error, Result};

/// A point in the plane.
pub type Point = [f64; 2];
