//! High-precision tools for the Hamburger moment problem.
//!
//! Moment sequences, Jacobi matrices and measures are converted into one
//! another ([`moments`], [`measures`]); Jacobi matrices are classified as
//! limit point (determinate) or limit circle (indeterminate) from their Weyl
//! circle radii ([`jacobi`]); [`bases`] builds Stone-vector and f-basis
//! representations, and [`determinacy_index`] estimates the index of
//! determinacy of a measure.
//!
//! Stored numbers are exact rationals. Computations run in the arithmetic
//! selected by a [`PrecisionConfig`]: exact rationals, MPFR floats of a
//! chosen size, or 53-bit floats.

#![allow(clippy::needless_range_loop)]

pub mod bases;
pub mod cli;
pub mod determinacy_index;
pub mod error;
pub mod jacobi;
pub mod linalg;
pub mod measures;
pub mod moments;
pub mod num;

pub use error::{Error, Result, Warning};
pub use jacobi::{ClassifyPolicy, DeterminacyVerdict, Family, JacobiMatrix, Verdict};
pub use measures::{Measure, Multiplier, QuadratureSpec, Support, WeightFunction};
pub use moments::MomentSequence;
pub use num::PrecisionConfig;
