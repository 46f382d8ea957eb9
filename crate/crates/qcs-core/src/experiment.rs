//! Problem generation, noise and corruption injection, metrics, and the
//! trial/sweep drivers.
//!
//! The reproducibility contract: every stochastic quantity is a pure
//! function of (master_seed, cell, trial). A cell identifies the problem
//! shape — dimension, sparsity, bit depth, bit budget, ISNR, corruption —
//! but not the algorithm, so every solver faces the same instance in a
//! given cell and trial. Records sort on (cell, algorithm, trial) before
//! they are returned, which makes sweep output independent of execution
//! schedule.

use crate::catalog::algorithm_rank;
use crate::linalg::{normalize, IndexSet};
use crate::quantizer::{Quantizer, QuantizerSpec};
use crate::rng;
use crate::solvers::{self, Algorithm, SolverConfig, StepSize};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::time::Instant;

// ---------------------------------------------------------------------------
// problems
// ---------------------------------------------------------------------------

/// One generated instance, carried through the noise -> corruption ->
/// quantization pipeline. `y` is empty until `quantize` runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub phi: DMatrix<f64>,
    /// K-sparse, unit norm.
    pub x_true: DVector<f64>,
    /// Phi * x_true.
    pub clean_measurements: DVector<f64>,
    /// After ISNR noise and sign corruption, before quantization.
    pub noisy_measurements: DVector<f64>,
    /// Quantized levels (empty before `quantize`).
    pub y: DVector<f64>,
    pub corrupted_indices: IndexSet,
    pub master_seed: u64,
}

impl Problem {
    /// Quantizes the (noisy, possibly corrupted) measurements into levels.
    pub fn quantize(&mut self, quantizer: &Quantizer) {
        self.y = quantizer.quantize(&self.noisy_measurements);
    }
}

/// Fresh instance: i.i.d. standard Gaussian Phi, a K-sparse unit-norm
/// signal on a uniformly random support. The draw order — matrix, support,
/// nonzeros — is fixed; recorded seeds reproduce instances only as long as
/// it stays fixed.
pub fn gen_problem(n: usize, m: usize, k: usize, seed: u64) -> Result<Problem> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: format!("sparsity must be in 1..={n}, got {k}"),
        });
    }
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: "at least one measurement is required".into(),
        });
    }
    let mut r = rng::seeded_rng(seed);
    let phi = rng::gaussian_matrix(&mut r, m, n);
    let support = rand::seq::index::sample(&mut r, n, k);
    let values = rng::gaussian_vector(&mut r, k);
    let mut x = DVector::zeros(n);
    for (j, i) in support.iter().enumerate() {
        x[i] = values[j];
    }
    let x_true = normalize(&x);
    let clean = &phi * &x_true;
    Ok(Problem {
        phi,
        x_true,
        noisy_measurements: clean.clone(),
        clean_measurements: clean,
        y: DVector::zeros(0),
        corrupted_indices: IndexSet::empty(),
        master_seed: seed,
    })
}

/// Adds Gaussian noise rescaled so the measurement-domain power ratio
/// 10 log10(||clean||^2 / ||n||^2) equals isnr_db exactly; infinite ISNR
/// leaves the measurements untouched. The exact rescale removes the
/// noise-power sampling variance from cross-cell comparisons.
pub fn add_noise(mut p: Problem, isnr_db: f64, seed: u64) -> Problem {
    debug_assert!(isnr_db > 0.0 || isnr_db.is_infinite(), "ISNR must be positive or infinite");
    if isnr_db.is_infinite() {
        p.noisy_measurements = p.clean_measurements.clone();
        return p;
    }
    let mut r = rng::seeded_rng(seed);
    let raw = rng::gaussian_vector(&mut r, p.clean_measurements.len());
    let raw_norm = raw.norm();
    let scale = if raw_norm == 0.0 {
        0.0
    } else {
        p.clean_measurements.norm() / raw_norm * 10f64.powf(-isnr_db / 20.0)
    };
    p.noisy_measurements = &p.clean_measurements + raw * scale;
    p
}

/// Flips the sign of floor(fraction * M) measurements, chosen uniformly
/// without replacement, before quantization. The tiny epsilon keeps
/// fraction * M from landing one ulp under the integer it denotes in
/// decimal (0.06 * 1000 must corrupt 60 measurements, not 59).
pub fn corrupt(mut p: Problem, fraction: f64, seed: u64) -> Problem {
    debug_assert!((0.0..=1.0).contains(&fraction), "fraction must be in [0, 1]");
    let m = p.noisy_measurements.len();
    let count = (fraction * m as f64 + 1e-9).floor() as usize;
    if count == 0 {
        return p;
    }
    let mut r = rng::seeded_rng(seed);
    let picked: Vec<usize> = rand::seq::index::sample(&mut r, m, count).into_vec();
    for &i in &picked {
        p.noisy_measurements[i] = -p.noisy_measurements[i];
    }
    p.corrupted_indices = IndexSet::from_unsorted(picked);
    p
}

/// Reconstruction SNR in dB: 10 log10(||truth||^2 / ||estimate - truth||^2),
/// +inf once the error energy drops below 1e-300 (exact recovery).
pub fn rsnr(estimate: &DVector<f64>, truth: &DVector<f64>) -> f64 {
    debug_assert_eq!(estimate.len(), truth.len());
    let err = (estimate - truth).norm_squared();
    if err < 1e-300 {
        f64::INFINITY
    } else {
        10.0 * (truth.norm_squared() / err).log10()
    }
}

/// The quantizer a bit depth denotes: 1 bit is the sign quantizer (levels
/// +-1), deeper depths are midpoint-uniform on [-alpha, alpha], and depth 0
/// is the identity (unquantized debugging runs).
pub fn quantizer_for(bit_depth: u32, alpha: f64) -> Result<Quantizer> {
    match bit_depth {
        0 => Ok(Quantizer::Identity),
        1 => Ok(Quantizer::from(QuantizerSpec::sign())),
        b => Ok(Quantizer::from(QuantizerSpec::uniform(b, alpha)?)),
    }
}

// ---------------------------------------------------------------------------
// cells and trials
// ---------------------------------------------------------------------------

/// One point of a sweep grid. `m` always equals floor(total_bits /
/// bit_depth) for quantized cells; identity cells (bit_depth 0) carry an
/// explicit m and a zero bit budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub bit_depth: u32,
    pub total_bits: u64,
    pub isnr_db: f64,
    pub corruption: f64,
}

impl Cell {
    /// Cell from a bit budget: m = floor(total_bits / bit_depth).
    pub fn from_budget(
        n: usize,
        k: usize,
        bit_depth: u32,
        total_bits: u64,
        isnr_db: f64,
        corruption: f64,
    ) -> Result<Cell> {
        if bit_depth == 0 {
            return Err(Error::InvalidParameter {
                name: "bits",
                reason: "a bit budget needs a positive bit depth".into(),
            });
        }
        let m = (total_bits / bit_depth as u64) as usize;
        if m == 0 {
            return Err(Error::InvalidParameter {
                name: "total_bits",
                reason: format!("budget {total_bits} at depth {bit_depth} leaves no measurements"),
            });
        }
        Ok(Cell { n, m, k, bit_depth, total_bits, isnr_db, corruption })
    }

    /// Cell from an explicit measurement count; the budget is m * depth.
    pub fn from_measurements(
        n: usize,
        k: usize,
        bit_depth: u32,
        m: usize,
        isnr_db: f64,
        corruption: f64,
    ) -> Cell {
        Cell {
            n,
            m,
            k,
            bit_depth,
            total_bits: m as u64 * bit_depth as u64,
            isnr_db,
            corruption,
        }
    }

    /// Seed-derivation label. Excludes the algorithm on purpose: every
    /// solver must face the identical instance within a cell and trial.
    pub fn id(&self) -> String {
        format!(
            "n{};m{};k{};b{};tb{};isnr{};corr{}",
            self.n, self.m, self.k, self.bit_depth, self.total_bits, self.isnr_db, self.corruption
        )
    }
}

/// Sweep-wide solver knobs, applied on top of each algorithm's defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub projection_mode: crate::projection::ProjectionMode,
    pub step_size: StepSize,
    /// None uses each algorithm's own default budget.
    pub max_iterations: Option<usize>,
    pub consistency_stop: bool,
    pub prune: bool,
    /// Saturation level of the uniform quantizer.
    pub alpha: f64,
    /// Overrides the AOP outlier budget; None hands AOP the true
    /// corruption count, which is the benchmark protocol.
    pub outlier_budget: Option<usize>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            projection_mode: crate::projection::ProjectionMode::Joint,
            step_size: StepSize::Auto,
            max_iterations: None,
            consistency_stop: true,
            prune: true,
            alpha: 3.0,
            outlier_budget: None,
        }
    }
}

/// One result row; mirrors the CSV schema minus the version column.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub algorithm: String,
    pub bit_depth: u32,
    pub total_bits: u64,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub isnr_db: f64,
    pub corruption: f64,
    pub trial_index: usize,
    pub seed: u64,
    pub rsnr_db: f64,
    pub iterations_run: usize,
    pub mismatch_count: usize,
    /// Wall-clock solve time. The one non-deterministic field; comparisons
    /// of recorded output mask it.
    pub runtime_ms: f64,
}

/// Runs every requested algorithm against the one instance this (cell,
/// trial) pair denotes. Generating the problem once per cell-trial is both
/// the fairness contract and a large saving; so is resolving the automatic
/// step size once, since it depends only on the matrix.
pub fn run_cell_trial(
    cell: &Cell,
    trial_index: usize,
    algorithms: &[Algorithm],
    master_seed: u64,
    settings: &SweepSettings,
) -> Result<Vec<TrialRecord>> {
    let seed = rng::trial_seed(master_seed, &cell.id(), trial_index);
    let p = gen_problem(cell.n, cell.m, cell.k, rng::sub_seed(seed, "problem"))?;
    let p = add_noise(p, cell.isnr_db, rng::sub_seed(seed, "noise"));
    let mut p = corrupt(p, cell.corruption, rng::sub_seed(seed, "corrupt"));
    let quantizer = quantizer_for(cell.bit_depth, settings.alpha)?;
    p.quantize(&quantizer);

    let step = match settings.step_size {
        StepSize::Fixed(mu) => StepSize::Fixed(mu),
        StepSize::Auto => {
            let needs_mu = algorithms
                .iter()
                .any(|a| matches!(a, Algorithm::Qiht | Algorithm::AopQiht));
            if needs_mu {
                StepSize::Fixed(solvers::auto_step(&p.phi)?)
            } else {
                StepSize::Auto
            }
        }
    };

    let mut records = Vec::with_capacity(algorithms.len());
    for &algorithm in algorithms {
        let mut cfg = SolverConfig::for_algorithm(algorithm, cell.k);
        cfg.projection_mode = settings.projection_mode;
        cfg.consistency_stop = settings.consistency_stop;
        cfg.prune = settings.prune;
        cfg.step_size = step;
        if let Some(iters) = settings.max_iterations {
            cfg.max_iterations = iters;
        }
        if algorithm == Algorithm::AopQiht {
            // the protocol hands AOP the true corruption count
            cfg.outlier_budget =
                settings.outlier_budget.unwrap_or_else(|| p.corrupted_indices.len());
        }
        let started = Instant::now();
        let result = solvers::run(algorithm, &p.phi, &p.y, &quantizer, &cfg)?;
        let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
        records.push(TrialRecord {
            algorithm: algorithm.name().to_owned(),
            bit_depth: cell.bit_depth,
            total_bits: cell.total_bits,
            m: cell.m,
            n: cell.n,
            k: cell.k,
            isnr_db: cell.isnr_db,
            corruption: cell.corruption,
            trial_index,
            seed,
            rsnr_db: rsnr(&result.estimate, &p.x_true),
            iterations_run: result.iterations_run,
            mismatch_count: result.mismatch_count,
            runtime_ms,
        });
    }
    Ok(records)
}

/// Single-algorithm convenience over `run_cell_trial`.
pub fn run_trial(
    cell: &Cell,
    trial_index: usize,
    algorithm: Algorithm,
    master_seed: u64,
    settings: &SweepSettings,
) -> Result<TrialRecord> {
    let mut records = run_cell_trial(cell, trial_index, &[algorithm], master_seed, settings)?;
    Ok(records.pop().expect("one algorithm in, one record out"))
}

// ---------------------------------------------------------------------------
// sweeps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub n: usize,
    pub sparsity_levels: Vec<usize>,
    pub total_bits: Vec<u64>,
    pub isnr_levels: Vec<f64>,
    pub bit_depths: Vec<u32>,
    pub corruption_fractions: Vec<f64>,
    pub trials: usize,
    pub algorithms: Vec<Algorithm>,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        fn nonempty<T>(list: &[T], name: &'static str) -> Result<()> {
            if list.is_empty() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "list must not be empty".into(),
                });
            }
            Ok(())
        }
        nonempty(&self.sparsity_levels, "k")?;
        nonempty(&self.total_bits, "total_bits")?;
        nonempty(&self.isnr_levels, "isnr")?;
        nonempty(&self.bit_depths, "bits")?;
        nonempty(&self.corruption_fractions, "corruption")?;
        nonempty(&self.algorithms, "algorithms")?;
        if self.trials == 0 {
            return Err(Error::InvalidParameter {
                name: "trials",
                reason: "at least one trial is required".into(),
            });
        }
        for &k in &self.sparsity_levels {
            if k == 0 || k > self.n {
                return Err(Error::InvalidParameter {
                    name: "k",
                    reason: format!("sparsity {k} outside 1..={}", self.n),
                });
            }
            if self.algorithms.contains(&Algorithm::Qcosamp) && 2 * k > self.n {
                return Err(Error::InvalidParameter {
                    name: "k",
                    reason: format!("QCoSaMP needs 2K <= N, got K = {k} with N = {}", self.n),
                });
            }
        }
        for &b in &self.bit_depths {
            if b == 0 {
                return Err(Error::InvalidParameter {
                    name: "bits",
                    reason: "sweep bit depths must be at least 1".into(),
                });
            }
            for &tb in &self.total_bits {
                if tb / b as u64 == 0 {
                    return Err(Error::InvalidParameter {
                        name: "total_bits",
                        reason: format!("budget {tb} at depth {b} leaves no measurements"),
                    });
                }
            }
        }
        for &isnr in &self.isnr_levels {
            if !(isnr > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "isnr",
                    reason: format!("ISNR must be positive or inf, got {isnr}"),
                });
            }
        }
        for &f in &self.corruption_fractions {
            if !(0.0..=0.10).contains(&f) {
                return Err(Error::InvalidParameter {
                    name: "corruption",
                    reason: format!("corruption fraction {f} outside [0, 0.10]"),
                });
            }
        }
        Ok(())
    }

    /// Every cell of the cross product, in a fixed enumeration order.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        self.validate()?;
        let mut out = Vec::new();
        for &k in &self.sparsity_levels {
            for &tb in &self.total_bits {
                for &b in &self.bit_depths {
                    for &isnr in &self.isnr_levels {
                        for &corr in &self.corruption_fractions {
                            out.push(Cell::from_budget(self.n, k, b, tb, isnr, corr)?);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Runs the whole grid. Trials execute in parallel (rayon's current pool);
/// per-trial seeds are derived statelessly and the output is sorted on
/// (cell, algorithm, trial), so the record list is a pure function of
/// (grid, master_seed, settings) regardless of schedule.
pub fn run_sweep(
    grid: &SweepGrid,
    master_seed: u64,
    settings: &SweepSettings,
) -> Result<Vec<TrialRecord>> {
    let cells = grid.cells()?;
    let jobs: Vec<(Cell, usize)> = cells
        .iter()
        .flat_map(|c| (0..grid.trials).map(move |t| (*c, t)))
        .collect();
    let nested: Result<Vec<Vec<TrialRecord>>> = jobs
        .par_iter()
        .map(|(cell, trial)| run_cell_trial(cell, *trial, &grid.algorithms, master_seed, settings))
        .collect();
    let mut records: Vec<TrialRecord> = nested?.into_iter().flatten().collect();
    sort_records(&mut records);
    Ok(records)
}

/// Canonical record order: cell fields, then algorithm, then trial.
pub fn sort_records(records: &mut [TrialRecord]) {
    records.sort_by(|a, b| {
        a.n.cmp(&b.n)
            .then(a.k.cmp(&b.k))
            .then(a.total_bits.cmp(&b.total_bits))
            .then(a.bit_depth.cmp(&b.bit_depth))
            .then(a.isnr_db.total_cmp(&b.isnr_db))
            .then(a.corruption.total_cmp(&b.corruption))
            .then(algorithm_rank(&a.algorithm).cmp(&algorithm_rank(&b.algorithm)))
            .then(a.trial_index.cmp(&b.trial_index))
    });
}
