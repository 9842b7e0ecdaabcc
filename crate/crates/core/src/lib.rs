//! Variational-inequality toolkit for affine operators on `Rⁿ`.
//!
//! The crate covers four pieces:
//!
//! * [`operators`]: affine maps `A(x) = Mx + q`, their spectrally certified
//!   moduli (Lipschitz, strong monotonicity, inverse strong monotonicity,
//!   expansiveness, relaxed cocoercivity) and sampled checks of the
//!   defining inequalities.
//! * [`geometry`]: boxes, balls, halfspaces, the probability simplex and
//!   affine subspaces, each with an exact metric projection.
//! * [`solvers`]: projected gradient and Halpern-anchored projected
//!   gradient, instrumented with the distance bound `‖x − x*‖ ≤ ‖Ax − Ax*‖/γ`
//!   available for `γ`-expansive operators.
//! * [`verification`]: uniqueness checks for the VI solution set backed by
//!   a brute-force grid oracle.
//!
//! The crate is `no_std` and only needs `alloc`.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod geometry;
pub mod linalg;
pub mod operators;
pub mod report;
pub mod sampling;
pub mod solvers;
pub mod verification;

pub use error::Error;
pub use geometry::ConvexSet;
pub use linalg::Matrix;
pub use operators::{certify_moduli, AffineOperator, CocoercivePair, OperatorModuli};
pub use report::{Status, VerificationReport};
pub use solvers::{IterationConfig, IterationTrace, NonexpansiveMap, TraceRecord, TraceStatus};
