//! The greedy reconstruction solvers: QIHT, AOP-QIHT, QCoSaMP, and QSP.
//!
//! All four consume the same inputs — a measurement matrix, a level-valued
//! measurement vector, the quantizer that produced it, and a `SolverConfig`
//! — and produce a `SolverResult` whose estimate is K-sparse and unit-norm
//! (zero only on degenerate inputs, flagged rather than raised so sweeps
//! never abort). Solvers are pure: identical inputs give bit-identical
//! results.
//!
//! Reduction chain, exercised by the oracle tests: with the identity
//! quantizer QIHT is IHT, QCoSaMP is CoSaMP, QSP is SP; with the sign
//! quantizer QIHT is BIHT; AOP-QIHT with a zero outlier budget produces
//! QIHT's iterates.

use crate::linalg::{
    embed, hard_threshold, least_squares, normalize, operator_norm, restrict_columns, support,
    top_support, IndexSet,
};
use crate::projection::{self, project_consistent, ProjectionMode};
use crate::quantizer::{Quantizer, QuantizerSpec};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Gradient step size for the hard-thresholding solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// 1 / ||Phi||_2^2, the classical IHT-safe choice.
    Auto,
    Fixed(f64),
}

/// Tolerance for the power iteration behind `StepSize::Auto`. The step only
/// needs the norm to about a percent; tight tolerances cost hundreds of
/// extra matrix passes on the large, nearly flat-spectrum Gaussian matrices
/// the experiment harness generates.
const AUTO_STEP_NORM_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// K, the number of nonzeros the estimate may carry.
    pub sparsity: usize,
    /// I, the iteration budget.
    pub max_iterations: usize,
    pub step_size: StepSize,
    /// L, AOP-QIHT's count of measurements it may discard as outliers.
    pub outlier_budget: usize,
    /// How QSP and QCoSaMP project onto the consistency regions.
    pub projection_mode: ProjectionMode,
    /// Stop QIHT once quantize(Phi x) = y. QCoSaMP always stops on exact
    /// consistency (its residual is identically zero from then on), and QSP
    /// and AOP-QIHT carry their own stopping rules.
    pub consistency_stop: bool,
    /// Prune QCoSaMP's projection back to K terms each iteration. Off, the
    /// listing runs verbatim but the output can carry up to 3K nonzeros.
    pub prune: bool,
}

impl SolverConfig {
    pub fn new(sparsity: usize) -> SolverConfig {
        SolverConfig {
            sparsity,
            max_iterations: 300,
            step_size: StepSize::Auto,
            outlier_budget: 0,
            projection_mode: ProjectionMode::default(),
            consistency_stop: true,
            prune: true,
        }
    }

    /// Defaults with the per-algorithm iteration budget.
    pub fn for_algorithm(algorithm: Algorithm, sparsity: usize) -> SolverConfig {
        SolverConfig {
            max_iterations: algorithm.default_max_iterations(),
            ..SolverConfig::new(sparsity)
        }
    }
}

/// Variant order is the catalog tie-break order; keep it stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Qiht,
    AopQiht,
    Qcosamp,
    Qsp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Qiht,
        Algorithm::AopQiht,
        Algorithm::Qcosamp,
        Algorithm::Qsp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Qiht => "qiht",
            Algorithm::AopQiht => "aop-qiht",
            Algorithm::Qcosamp => "qcosamp",
            Algorithm::Qsp => "qsp",
        }
    }

    /// Hard-thresholding methods need a longer leash than the pursuit
    /// methods, whose per-iteration projection does most of the work.
    pub fn default_max_iterations(self) -> usize {
        match self {
            Algorithm::Qiht | Algorithm::AopQiht => 300,
            Algorithm::Qcosamp | Algorithm::Qsp => 50,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Algorithm, String> {
        match s {
            "qiht" => Ok(Algorithm::Qiht),
            "aop-qiht" => Ok(Algorithm::AopQiht),
            "qcosamp" => Ok(Algorithm::Qcosamp),
            "qsp" => Ok(Algorithm::Qsp),
            other => Err(format!("unknown algorithm '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    /// Unit-norm estimate, or zero on degenerate failure.
    pub estimate: DVector<f64>,
    pub iterations_run: usize,
    /// Hamming distance between y and quantize(Phi estimate).
    pub mismatch_count: usize,
    /// AOP-QIHT's final measurement mask (false = discarded as outlier).
    pub outlier_mask: Option<Vec<bool>>,
    /// Per-iteration diagnostic. QIHT/AOP-QIHT record their consistency
    /// objectives (QIHT's final entry is evaluated at the normalized
    /// output); QCoSaMP and QSP record residual norms, and QSP's last entry
    /// may belong to a rejected candidate support.
    pub objective_trace: Vec<f64>,
    /// True when the estimate is the zero vector.
    pub degenerate: bool,
}

/// Dispatch by algorithm tag. Convenience for the sweep driver.
pub fn run(
    algorithm: Algorithm,
    phi: &DMatrix<f64>,
    y: &DVector<f64>,
    quantizer: &Quantizer,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    match algorithm {
        Algorithm::Qiht => qiht(phi, y, quantizer, cfg),
        Algorithm::AopQiht => aop_qiht(phi, y, quantizer, cfg),
        Algorithm::Qcosamp => qcosamp(phi, y, quantizer, cfg),
        Algorithm::Qsp => qsp(phi, y, quantizer, cfg),
    }
}

// ---------------------------------------------------------------------------
// shared pieces
// ---------------------------------------------------------------------------

fn validate_common(
    phi: &DMatrix<f64>,
    y: &DVector<f64>,
    quantizer: &Quantizer,
    cfg: &SolverConfig,
) -> Result<()> {
    if phi.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "solver input",
            expected: phi.nrows(),
            actual: y.len(),
        });
    }
    if cfg.sparsity == 0 || cfg.sparsity > phi.ncols() {
        return Err(Error::InvalidParameter {
            name: "sparsity",
            reason: format!("K must be in 1..={}, got {}", phi.ncols(), cfg.sparsity),
        });
    }
    if cfg.max_iterations == 0 {
        return Err(Error::InvalidParameter {
            name: "max_iterations",
            reason: "iteration budget must be positive".into(),
        });
    }
    if let StepSize::Fixed(mu) = cfg.step_size {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter {
                name: "step_size",
                reason: format!("step size must be a positive finite real, got {mu}"),
            });
        }
    }
    if let Quantizer::Scalar(spec) = quantizer {
        for &v in y.iter() {
            spec.region_of(v)?;
        }
    }
    Ok(())
}

/// The step `StepSize::Auto` resolves to: 1 / ||Phi||_2^2. Exposed so a
/// caller running several solvers on one matrix can resolve it once and
/// pass the same `Fixed` value to each.
pub fn auto_step(phi: &DMatrix<f64>) -> Result<f64> {
    let sigma = operator_norm(phi, AUTO_STEP_NORM_TOL)?;
    if sigma == 0.0 {
        return Err(Error::InvalidParameter {
            name: "step_size",
            reason: "cannot derive a step size: the operator norm is zero".into(),
        });
    }
    Ok(1.0 / (sigma * sigma))
}

fn resolve_step(phi: &DMatrix<f64>, step: StepSize) -> Result<f64> {
    match step {
        StepSize::Fixed(mu) => Ok(mu),
        StepSize::Auto => auto_step(phi),
    }
}

/// Normalize the final iterate and measure its quantized consistency.
fn finish(
    phi: &DMatrix<f64>,
    y: &DVector<f64>,
    quantizer: &Quantizer,
    x_final: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>, usize, bool) {
    let estimate = normalize(x_final);
    let degenerate = estimate.norm() == 0.0;
    let image = phi * &estimate;
    let mismatch = quantizer.mismatch_count(&image, y);
    (estimate, image, mismatch, degenerate)
}

fn degenerate_result(
    phi: &DMatrix<f64>,
    y: &DVector<f64>,
    quantizer: &Quantizer,
    outlier_mask: Option<Vec<bool>>,
) -> SolverResult {
    let estimate = DVector::zeros(phi.ncols());
    let image = DVector::zeros(phi.nrows());
    SolverResult {
        mismatch_count: quantizer.mismatch_count(&image, y),
        estimate,
        iterations_run: 0,
        outlier_mask,
        objective_trace: Vec::new(),
        degenerate: true,
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The threshold-weighted one-sided consistency objective, evaluated from a
/// precomputed image z = Phi x: sum over measurements and interior
/// thresholds of w_j |[sign(z_k - tau_j)(y_k - tau_j)]_-|. For the identity
/// quantizer the classical 0.5 ||y - z||^2 takes its place.
struct Objective {
    thresholds: Vec<f64>,
    weights: Vec<f64>,
    identity: bool,
}

impl Objective {
    fn new(quantizer: &Quantizer) -> Objective {
        match quantizer {
            Quantizer::Identity => Objective {
                thresholds: Vec::new(),
                weights: Vec::new(),
                identity: true,
            },
            Quantizer::Scalar(spec) => Objective {
                thresholds: spec.interior_thresholds().to_vec(),
                weights: spec.level_weights(),
                identity: false,
            },
        }
    }

    fn eval(&self, image: &DVector<f64>, y: &DVector<f64>) -> f64 {
        if self.identity {
            let mut s = 0.0;
            for k in 0..y.len() {
                let d = y[k] - image[k];
                s += d * d;
            }
            return 0.5 * s;
        }
        let mut total = 0.0;
        for k in 0..y.len() {
            for (j, &tau) in self.thresholds.iter().enumerate() {
                let one_sided = sign(image[k] - tau) * (y[k] - tau);
                if one_sided < 0.0 {
                    total += self.weights[j] * -one_sided;
                }
            }
        }
        total
    }
}

// ---------------------------------------------------------------------------
// QIHT
// ---------------------------------------------------------------------------

/// Quantized iterative hard thresholding. From x0 = normalize(Phi^T y),
/// repeat a = x + mu Phi^T (y - quantize(Phi x)), x = eta_K(a), stopping at
/// the iteration budget or (with `consistency_stop`, after at least one
/// update) on quantized consistency. Returns the final iterate normalized.
pub fn qiht(
    phi: &DMatrix<f64>,
    y: &DVector<f64>,
    quantizer: &Quantizer,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    validate_common(phi, y, quantizer, cfg)?;
    let init = phi.tr_mul(y);
    if init.norm() == 0.0 {
        return Ok(degenerate_result(phi, y, quantizer, None));
    }
    let mu = resolve_step(phi, cfg.step_size)?;
    let objective = Objective::new(quantizer);

    let mut x = normalize(&init);
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        if iterations >= cfg.max_iterations {
            break;
        }
        let image = phi * &x;
        let quantized = quantizer.quantize(&image);
        if iterations > 0 {
            if cfg.consistency_stop && quantized == *y {
                break;
            }
            // the image already in hand belongs to the previous iterate;
            // its objective entry is recorded here, one iteration late, so
            // the loop costs exactly two matrix passes per iteration
            trace.push(objective.eval(&image, y));
        }
        let a = &x + phi.tr_mul(&(y - quantized)) * mu;
        x = hard_threshold(&a, cfg.sparsity)?;
        iterations += 1;
    }

    let (estimate, image, mismatch_count, degenerate) = finish(phi, y, quantizer, &x);
    trace.push(objective.eval(&image, y));
    Ok(SolverResult {
        estimate,
        iterations_run: iterations,
        mismatch_count,
        outlier_mask: None,
        objective_trace: trace,
        degenerate,
    })
}

// ---------------------------------------------------------------------------
// AOP primitives and AOP-QIHT
// ---------------------------------------------------------------------------

/// phi(x, y): sum over interior thresholds of |[(x - tau)(y - tau)]_-|.
/// Zero exactly when x and y sit on the same side of every interior
/// threshold, i.e. in the same quantization region (off boundaries).
pub fn phi_penalty(spec: &QuantizerSpec, x: f64, y: f64) -> f64 {
    let mut total = 0.0;
    for &tau in spec.interior_thresholds() {
        let p = (x - tau) * (y - tau);
        if p < 0.0 {
            total += -p;
        }
    }
    total
}

fn phi_penalty_q(quantizer: &Quantizer, x: f64, y: f64) -> f64 {
    match quantizer {
        Quantizer::Scalar(spec) => phi_penalty(spec, x, y),
        Quantizer::Identity => 0.0,
    }
}

/// The mask Lambda dropping exactly the L largest penalties (ties resolved
/// toward the lowest index). false marks an outlier.
pub fn select_outliers(penalties: &DVector<f64>, l: usize) -> Result<Vec<bool>> {
    if l > penalties.len() {
        return Err(Error::InvalidParameter {
            name: "outlier_budget",
            reason: format!("L must be at most {}, got {l}", penalties.len()),
        });
    }
    let mut mask = vec![true; penalties.len()];
    if l == 0 {
        return Ok(mask);
    }
    let mut idx: Vec<usize> = (0..penalties.len()).collect();
    idx.sort_unstable_by(|&a, &b| {
        penalties[b]
            .partial_cmp(&penalties[a])
            .expect("penalties must not be NaN")
            .then(a.cmp(&b))
    });
    for &i in &idx[..l] {
        mask[i] = false;
    }
    Ok(mask)
}

/// QIHT wrapped in adaptive outlier pursuit. The gradient is restricted to
/// the currently trusted measurements; the mask is refreshed from the
/// per-measurement penalties whenever the consistency Hamming distance
/// matches or improves on the best seen. The loop runs while iterations
/// remain and the budget L has not overtaken that distance;
/// `consistency_stop` is ignored, the listing's own rule governs.
pub fn aop_qiht(
    phi: &DMatrix<f64>,
    y: &DVector<f64>,
    quantizer: &Quantizer,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    validate_common(phi, y, quantizer, cfg)?;
    let m = phi.nrows();
    if cfg.outlier_budget > m {
        return Err(Error::InvalidParameter {
            name: "outlier_budget",
            reason: format!("L must be at most M = {m}, got {}", cfg.outlier_budget),
        });
    }
    let init = phi.tr_mul(y);
    if init.norm() == 0.0 {
        return Ok(degenerate_result(phi, y, quantizer, Some(vec![true; m])));
    }
    let mu = resolve_step(phi, cfg.step_size)?;

    let mut x = normalize(&init);
    let mut image = phi * &x;
    let mut mask = vec![true; m];
    let mut tol = usize::MAX; // current Hamming distance, "infinite" until measured
    let mut best_tol = usize::MAX;
    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < cfg.max_iterations && cfg.outlier_budget <= tol {
        let quantized = quantizer.quantize(&image);
        let mut residual = y - quantized;
        for k in 0..m {
            if !mask[k] {
                residual[k] = 0.0;
            }
        }
        let a = &x + phi.tr_mul(&residual) * mu;
        x = hard_threshold(&a, cfg.sparsity)?;
        image = phi * &x; // reused by the next iteration's gradient
        tol = quantizer.mismatch_count(&image, y);
        let penalties = DVector::from_fn(m, |k, _| phi_penalty_q(quantizer, image[k], y[k]));
        if tol <= best_tol {
            mask = select_outliers(&penalties, cfg.outlier_budget)?;
            best_tol = tol;
        }
        iterations += 1;
        let masked_objective: f64 =
            (0..m).filter(|&k| mask[k]).map(|k| penalties[k]).sum();
        trace.push(masked_objective);
    }

    let (estimate, _, mismatch_count, degenerate) = finish(phi, y, quantizer, &x);
    Ok(SolverResult {
        estimate,
        iterations_run: iterations,
        mismatch_count,
        outlier_mask: Some(mask),
        objective_trace: trace,
        degenerate,
    })
}

// ---------------------------------------------------------------------------
// QCoSaMP
// ---------------------------------------------------------------------------

/// Quantized CoSaMP. Per iteration: proxy u = Phi^T v, candidate support
/// Omega = top 2K of u merged with the current support, consistency
/// projection onto that support, prune to K (unless disabled), and a
/// quantized residual update v = y - quantize(Phi a). Stops at the
/// iteration budget or as soon as v vanishes (the estimate is then exactly
/// consistent and every later iterate would repeat).
pub fn qcosamp(
    phi: &DMatrix<f64>,
    y: &DVector<f64>,
    quantizer: &Quantizer,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    validate_common(phi, y, quantizer, cfg)?;
    let n = phi.ncols();
    if 2 * cfg.sparsity > n {
        return Err(Error::InvalidParameter {
            name: "sparsity",
            reason: format!("QCoSaMP needs 2K <= N, got K = {} with N = {n}", cfg.sparsity),
        });
    }

    let mut a = DVector::zeros(n);
    let mut v = y.clone();
    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        let u = phi.tr_mul(&v);
        let omega = top_support(&u, 2 * cfg.sparsity)?;
        let t = omega.union(&support(&a));
        let phi_t = restrict_columns(phi, &t)?;
        let proj = project_consistent(
            &phi_t,
            y,
            quantizer,
            cfg.projection_mode,
            projection::DEFAULT_MAX_ITER,
            projection::DEFAULT_TOL,
        )?;
        let b = embed(&proj.coefficients, &t, n);
        a = if cfg.prune {
            hard_threshold(&b, cfg.sparsity)?
        } else {
            b
        };
        let image = phi * &a;
        v = y - quantizer.quantize(&image);
        iterations += 1;
        trace.push(v.norm());
        if v.iter().all(|&e| e == 0.0) {
            break;
        }
    }

    let (estimate, _, mismatch_count, degenerate) = finish(phi, y, quantizer, &a);
    Ok(SolverResult {
        estimate,
        iterations_run: iterations,
        mismatch_count,
        outlier_mask: None,
        objective_trace: trace,
        degenerate,
    })
}

// ---------------------------------------------------------------------------
// QSP
// ---------------------------------------------------------------------------

/// Quantized subspace pursuit. Keeps a working support of size K; each
/// iteration enlarges it with the top-K correlations of the residual,
/// re-projects, and reselects the K largest coefficients. Iteration stops
/// when the residual norm fails to decrease (the previous support is kept),
/// when the support repeats (nothing further can change), when the residual
/// is exactly zero, or at the budget. The output least-squares refits the
/// final support against y itself.
pub fn qsp(
    phi: &DMatrix<f64>,
    y: &DVector<f64>,
    quantizer: &Quantizer,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    validate_common(phi, y, quantizer, cfg)?;
    let n = phi.ncols();
    let k = cfg.sparsity;
    let project = |t: &IndexSet| -> Result<crate::projection::ProjectionResult> {
        let phi_t = restrict_columns(phi, t)?;
        project_consistent(
            &phi_t,
            y,
            quantizer,
            cfg.projection_mode,
            projection::DEFAULT_MAX_ITER,
            projection::DEFAULT_TOL,
        )
    };

    let mut t = top_support(&phi.tr_mul(y), k)?;
    let mut residual = project(&t)?.residual;
    let mut residual_norm = residual.norm();
    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < cfg.max_iterations && residual_norm > 0.0 {
        let t_tilde = t.union(&top_support(&phi.tr_mul(&residual), k)?);
        let coeffs = project(&t_tilde)?.coefficients;
        let candidate = top_support(&embed(&coeffs, &t_tilde, n), k)?;
        let proj = project(&candidate)?;
        let candidate_norm = proj.residual.norm();
        iterations += 1;
        trace.push(candidate_norm);
        if candidate_norm > residual_norm {
            break; // revert: the previous support stands
        }
        let stagnated = candidate == t;
        t = candidate;
        residual = proj.residual;
        residual_norm = candidate_norm;
        if stagnated {
            break; // fixed point: every further iteration repeats
        }
    }

    let coeffs = least_squares(&restrict_columns(phi, &t)?, y)?;
    let x = embed(&coeffs, &t, n);
    let (estimate, _, mismatch_count, degenerate) = finish(phi, y, quantizer, &x);
    Ok(SolverResult {
        estimate,
        iterations_run: iterations,
        mismatch_count,
        outlier_mask: None,
        objective_trace: trace,
        degenerate,
    })
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
