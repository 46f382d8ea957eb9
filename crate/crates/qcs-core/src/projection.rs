//! Consistency projections used by the pursuit solvers.
//!
//! Given a column-restricted matrix Phi_T and a level vector y, the goal is
//! a coefficient vector x and a point y' inside the region box R_y with
//! ||y' - Phi_T x|| small. `resid` extracts y' - Phi_T x, `pcoeff` extracts
//! x. Two modes:
//!
//! * `PaperLiteral`: project y onto the closed box (a no-op, levels sit in
//!   their own regions) and least-squares fit once. This is the classical
//!   residual/coefficient pair of unquantized subspace pursuit.
//! * `Joint`: alternate exact block minimizations, least squares in x and a
//!   componentwise clamp in y', starting from y' = y. The objective is
//!   non-increasing because each substep is an exact convex minimization in
//!   one block.
//!
//! Both modes end on a least-squares solve, so the returned residual is
//! orthogonal to range(Phi_T).

use crate::linalg::LstSq;
use crate::quantizer::Quantizer;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionMode {
    /// One-shot least squares against y itself.
    PaperLiteral,
    /// Alternating minimization over (coefficients, consistent point).
    #[default]
    Joint,
}

/// Default alternation budget for `Joint` mode.
pub const DEFAULT_MAX_ITER: usize = 50;
/// Default relative tolerance on successive consistent points.
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ProjectionResult {
    /// Fitted coefficients over T (length = columns of Phi_T).
    pub coefficients: DVector<f64>,
    /// The point y' in the closed region box.
    pub consistent_point: DVector<f64>,
    /// consistent_point - Phi_T * coefficients.
    pub residual: DVector<f64>,
    /// Alternation passes performed (1 in `PaperLiteral` mode).
    pub iterations: usize,
}

/// Jointly fits coefficients and a region-consistent point for the level
/// vector y against the columns Phi_T.
pub fn project_consistent(
    phi_t: &DMatrix<f64>,
    y: &DVector<f64>,
    quantizer: &Quantizer,
    mode: ProjectionMode,
    max_iter: usize,
    tol: f64,
) -> Result<ProjectionResult> {
    if phi_t.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "project_consistent",
            expected: phi_t.nrows(),
            actual: y.len(),
        });
    }
    // also validates that every y entry is a level
    let (lower, upper) = quantizer.region_bounds(y)?;
    let solver = LstSq::factor(phi_t);

    match mode {
        ProjectionMode::PaperLiteral => {
            let coefficients = solver.solve(y);
            let residual = y - phi_t * &coefficients;
            Ok(ProjectionResult {
                coefficients,
                consistent_point: y.clone(),
                residual,
                iterations: 1,
            })
        }
        ProjectionMode::Joint => {
            let y_norm = y.norm();
            let mut point = y.clone();
            let mut coeffs = solver.solve(&point);
            let mut iterations = 0;
            #[cfg(debug_assertions)]
            let mut prev_objective = f64::INFINITY;
            loop {
                let image = phi_t * &coeffs;
                let next = DVector::from_fn(y.len(), |i, _| image[i].clamp(lower[i], upper[i]));
                iterations += 1;
                let converged = (&next - &point).norm() <= tol * y_norm;
                point = next;
                coeffs = solver.solve(&point);
                #[cfg(debug_assertions)]
                {
                    let objective = (&point - phi_t * &coeffs).norm();
                    debug_assert!(
                        objective <= prev_objective + 1e-9 * (1.0 + prev_objective.min(f64::MAX)),
                        "alternation objective increased: {prev_objective} -> {objective}"
                    );
                    prev_objective = objective;
                }
                if converged || iterations >= max_iter {
                    break;
                }
            }
            let residual = &point - phi_t * &coeffs;
            Ok(ProjectionResult {
                coefficients: coeffs,
                consistent_point: point,
                residual,
                iterations,
            })
        }
    }
}

/// The residual y' - Phi_T x of the consistency projection.
pub fn resid(
    y: &DVector<f64>,
    phi_t: &DMatrix<f64>,
    quantizer: &Quantizer,
    mode: ProjectionMode,
) -> Result<DVector<f64>> {
    project_consistent(phi_t, y, quantizer, mode, DEFAULT_MAX_ITER, DEFAULT_TOL)
        .map(|r| r.residual)
}

/// The fitted coefficients x of the consistency projection.
pub fn pcoeff(
    y: &DVector<f64>,
    phi_t: &DMatrix<f64>,
    quantizer: &Quantizer,
    mode: ProjectionMode,
) -> Result<DVector<f64>> {
    project_consistent(phi_t, y, quantizer, mode, DEFAULT_MAX_ITER, DEFAULT_TOL)
        .map(|r| r.coefficients)
}
