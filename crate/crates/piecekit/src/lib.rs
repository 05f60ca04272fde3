//! Piecewise representations of real functions of one real variable.
//!
//! A function is stored as a sum of parametric elementary formulas on
//! each interval of a partition. Fitting builds such representations to
//! a requested tolerance, and integral transforms with closed-form
//! kernel primitives (moments, the Hilbert transform) are evaluated from
//! boundary terms alone, with no quadrature in the production path.

pub mod catalog;
pub mod demo;
pub mod dilog;
pub mod hilbert;
pub mod json;
pub mod fit;
pub mod kernel;
pub mod piece;
pub mod quad;

pub use catalog::{
    check_constraint, formula_eval, moment_primitive, reflect_params, scale_params, Formula,
};
pub use dilog::{dilog, dilog_real};
pub use fit::{fit_interval, piecewisefit, Anchor, Candidate, FitConfig, FitError, FitReport};
pub use hilbert::{hilbert, register_hilbert_primitives};
pub use json::{from_json, to_json};
pub use kernel::{builtin_registry, moments, KernelRegistry, PrimitiveFn, TransformError};
pub use num_complex::Complex64;
pub use piece::{Parity, Piece, PiecewiseFunction, Term};
