//! Exact enumeration toolkit for concentration inequalities of vector-valued
//! functions on the Hamming cube `{-1,1}^n`.
//!
//! Functions are stored by their values on all `2^n` vertices; every
//! expectation is an exact vertex average. On top of that the crate computes
//! entropies, Orlicz norms, Lipschitz gradients, norm moments and exponential
//! moments ([`functionals`]), turns the log-Sobolev / moment-growth chain into
//! executable checks ([`verify`]), handles matrix-valued functions under
//! Schatten norms ([`matrix`]) and searches for near-extremal Lipschitz
//! functions ([`extremal`]).

// `!(p >= 1.0)` is how NaN gets rejected alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cube;
pub mod error;
pub mod extremal;
pub mod functionals;
pub mod linalg;
pub mod matrix;
pub mod reduce;
pub mod report;
pub mod spaces;
pub mod verify;

pub use cube::{CubeFunction, FourierCoefficients, FunctionFile};
pub use error::{Error, Result};
pub use functionals::{DeltaStrategy, GradientMode};
pub use spaces::{SpaceDescriptor, SpaceKind};
pub use report::{CheckResult, Report, Status};
