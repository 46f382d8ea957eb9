//! Sparse signal recovery from quantized linear measurements.
//!
//! The crate implements the scalar quantizer model, the consistency
//! projections `resid`/`pcoeff`, and four greedy reconstruction algorithms
//! (QSP, QIHT, QCoSaMP, AOP-QIHT), together with a deterministic Monte-Carlo
//! harness that benchmarks them across bit depths, bit budgets, noise levels,
//! and measurement corruption.
//!
//! Signal magnitudes are not recoverable from low-bit measurements, so truth
//! and estimates live on the unit sphere; all solvers return unit-norm
//! estimates (or a flagged zero vector on degenerate input).

pub mod catalog;
pub mod experiment;
pub mod linalg;
pub mod projection;
pub mod quantizer;
pub mod rng;
pub mod solvers;

pub use nalgebra::{DMatrix, DVector};

pub use catalog::{best_catalog, CatalogRow};
pub use experiment::{Problem, SweepGrid, SweepSettings, TrialRecord};
pub use linalg::IndexSet;
pub use projection::{ProjectionMode, ProjectionResult};
pub use quantizer::{Quantizer, QuantizerSpec, Region};
pub use solvers::{Algorithm, SolverConfig, SolverResult, StepSize};

use std::fmt;

/// Errors reported by constructors and solver entry points.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar parameter is outside its documented range.
    InvalidParameter { name: &'static str, reason: String },
    /// Two arguments that must agree in length or shape do not.
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    /// A measurement value is not a level of the active quantizer,
    /// i.e. it cannot have been produced by quantization.
    NotALevel(f64),
    /// An index set refers past the end of the object it indexes.
    IndexOutOfRange { index: usize, bound: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::DimensionMismatch {
                context,
                expected,
                actual,
            } => {
                write!(f, "dimension mismatch in {context}: expected {expected}, got {actual}")
            }
            Error::NotALevel(v) => {
                write!(f, "value {v} is not a quantization level of the active quantizer")
            }
            Error::IndexOutOfRange { index, bound } => {
                write!(f, "index {index} out of range (bound {bound})")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
