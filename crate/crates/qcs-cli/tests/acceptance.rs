//! Release gate. One test per shipping criterion; each prints a single
//! PASS or FAIL line, visible with
//!
//! ```text
//! cargo test -p qcs-cli --test acceptance -- --nocapture
//! ```
//!
//! The catalog criteria (2, 3, 5, 7) run the real sweep machinery at
//! benchmark scale, so this target takes tens of minutes on one core.
//! Everything is seeded; reruns reproduce the same verdicts bit for bit.

use qcs_cli::csvio::{self, SummaryRow};
use qcs_core::catalog::{best_catalog, GroupField};
use qcs_core::experiment::{self, Cell, SweepGrid, SweepSettings};
use qcs_core::linalg::{hard_threshold, support};
use qcs_core::projection::{self, ProjectionMode};
use qcs_core::quantizer::{Quantizer, QuantizerSpec};
use qcs_core::rng::{gaussian_matrix, gaussian_vector, seeded_rng};
use qcs_core::solvers::{self, Algorithm, SolverConfig, StepSize};
use qcs_core::DVector;
use qcs_reference as reference;
use std::time::Instant;

fn pass(name: &str, start: Instant, detail: &str) {
    println!("[PASS] {name}: {detail} ({:.1}s)", start.elapsed().as_secs_f64());
}

fn fail(name: &str, detail: &str) -> ! {
    panic!("[FAIL] {name}: {detail}");
}

fn sweep(grid: &SweepGrid, master_seed: u64) -> Vec<SummaryRow> {
    let records = experiment::run_sweep(grid, master_seed, &SweepSettings::default()).unwrap();
    csvio::summarize(&records)
}

fn mean_of(rows: &[SummaryRow], alg: &str, pick: impl Fn(&SummaryRow) -> bool) -> f64 {
    rows.iter()
        .find(|r| r.algorithm == alg && pick(r))
        .unwrap_or_else(|| panic!("missing summary row for {alg}"))
        .mean_rsnr_db
}

// ---------------------------------------------------------------- 1

/// With the identity quantizer, qiht / qcosamp / qsp must walk the exact
/// iterate trajectories of plain IHT / CoSaMP / SP, and with the sign
/// quantizer qiht must perform the BIHT update. Checked prefix by prefix
/// on 20 random instances per family: same support, coefficients to 1e-10.
#[test]
fn criterion_1_classical_oracle_equivalence() {
    const NAME: &str = "criterion 1 (oracle equivalence)";
    const N: usize = 32;
    const M: usize = 16;
    const K: usize = 3;
    const PREFIXES: usize = 6;
    let start = Instant::now();

    let mut checked = 0usize;
    for seed in 0..20u64 {
        let mut rng = seeded_rng(9000 + seed);
        let phi = gaussian_matrix(&mut rng, M, N);
        let mut x = DVector::zeros(N);
        let vals = gaussian_vector(&mut rng, K);
        for (j, i) in rand::seq::index::sample(&mut rng, N, K).iter().enumerate() {
            x[i] = vals[j];
        }
        let y = &phi * &x + gaussian_vector(&mut rng, M) * 0.05;
        let ref_phi = reference::Mat::from_column_slice(M, N, phi.as_slice());
        let y_ref: Vec<f64> = y.iter().copied().collect();
        let mu = solvers::auto_step(&phi).unwrap();

        let run_prefix = |alg: Algorithm, quantizer: &Quantizer, rhs: &DVector<f64>, t: usize| {
            let mut cfg = SolverConfig::for_algorithm(alg, K);
            cfg.max_iterations = t;
            cfg.step_size = StepSize::Fixed(mu);
            cfg.consistency_stop = false;
            solvers::run(alg, &phi, rhs, quantizer, &cfg).unwrap().estimate
        };
        let check = |got: &DVector<f64>, want_raw: &[f64], what: &str| {
            let want = reference::normalized(want_raw);
            let want_support: Vec<usize> = want
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, _)| i)
                .collect();
            if support(got).as_slice() != want_support.as_slice() {
                fail(NAME, &format!("{what} on seed {seed}: supports diverged"));
            }
            for (a, b) in got.iter().zip(&want) {
                if (a - b).abs() > 1e-10 {
                    fail(NAME, &format!("{what} on seed {seed}: coefficients differ ({a} vs {b})"));
                }
            }
        };

        let identity = Quantizer::Identity;
        let sign = Quantizer::Scalar(QuantizerSpec::sign());
        let y_sign = sign.quantize(&y);
        let y_sign_ref: Vec<f64> = y_sign.iter().copied().collect();

        let iht_trail = reference::iht(&ref_phi, &y_ref, K, mu, PREFIXES);
        let biht_trail = reference::biht(&ref_phi, &y_sign_ref, K, mu, PREFIXES);
        let cosamp_trail = reference::cosamp(&ref_phi, &y_ref, K, PREFIXES);
        for t in 1..=PREFIXES {
            check(&run_prefix(Algorithm::Qiht, &identity, &y, t), &iht_trail[t - 1], "qiht/iht");
            check(&run_prefix(Algorithm::Qiht, &sign, &y_sign, t), &biht_trail[t - 1], "qiht/biht");
            check(
                &run_prefix(Algorithm::Qcosamp, &identity, &y, t),
                &cosamp_trail[t - 1],
                "qcosamp/cosamp",
            );
            let sp_trail = reference::sp(&ref_phi, &y_ref, K, t);
            check(
                &run_prefix(Algorithm::Qsp, &identity, &y, t),
                sp_trail.last().unwrap(),
                "qsp/sp",
            );
            checked += 4;
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 10.0 {
        fail(NAME, &format!("budget is 10 s, took {elapsed:.1} s"));
    }
    pass(NAME, start, &format!("{checked} prefix iterates matched across 20 instances x 4 families"));
}

// ---------------------------------------------------------------- 2

/// 1-bit recovery under sign corruption, N = M = 1000, K = 10, 40 trials,
/// AOP handed the true corruption count. AOP-QIHT must match or beat plain
/// QIHT at every corruption level from 2% up, by at least 1 dB from 6% up.
#[test]
fn criterion_2_aop_corruption_margin() {
    const NAME: &str = "criterion 2 (AOP corruption margin)";
    let start = Instant::now();
    let grid = SweepGrid {
        n: 1000,
        sparsity_levels: vec![10],
        total_bits: vec![1000],
        isnr_levels: vec![f64::INFINITY],
        bit_depths: vec![1],
        corruption_fractions: vec![0.0, 0.02, 0.04, 0.06, 0.08, 0.10],
        trials: 40,
        algorithms: vec![Algorithm::Qiht, Algorithm::AopQiht],
    };
    let rows = sweep(&grid, 2);

    let mut report = Vec::new();
    for &level in &grid.corruption_fractions {
        let qiht = mean_of(&rows, "qiht", |r| r.corruption == level);
        let aop = mean_of(&rows, "aop-qiht", |r| r.corruption == level);
        report.push(format!("{:.0}%: {qiht:.2}/{aop:.2}", level * 100.0));
        if level >= 0.02 && aop < qiht {
            fail(
                NAME,
                &format!("at {:.0}% corruption AOP ({aop:.2} dB) fell below QIHT ({qiht:.2} dB)", level * 100.0),
            );
        }
        if level >= 0.06 && aop - qiht < 1.0 {
            fail(
                NAME,
                &format!(
                    "at {:.0}% corruption AOP led by only {:.2} dB (need 1 dB)",
                    level * 100.0,
                    aop - qiht
                ),
            );
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 900.0 {
        fail(NAME, &format!("budget is 15 min, took {elapsed:.0} s"));
    }
    pass(NAME, start, &format!("mean RSNR qiht/aop by corruption: {}", report.join(", ")));
}

// ---------------------------------------------------------------- 3

/// At one bit, QIHT must match or beat both pursuit methods for every
/// budget in {1000, 2000, 4000}; noiseless, N = 1000, K = 10, 40 trials.
#[test]
fn criterion_3_one_bit_ordering() {
    const NAME: &str = "criterion 3 (1-bit ordering)";
    let start = Instant::now();
    let grid = SweepGrid {
        n: 1000,
        sparsity_levels: vec![10],
        total_bits: vec![1000, 2000, 4000],
        isnr_levels: vec![f64::INFINITY],
        bit_depths: vec![1],
        corruption_fractions: vec![0.0],
        trials: 40,
        algorithms: vec![Algorithm::Qiht, Algorithm::Qcosamp, Algorithm::Qsp],
    };
    let rows = sweep(&grid, 3);

    let mut report = Vec::new();
    for &tb in &grid.total_bits {
        let qiht = mean_of(&rows, "qiht", |r| r.total_bits == tb);
        let qcosamp = mean_of(&rows, "qcosamp", |r| r.total_bits == tb);
        let qsp = mean_of(&rows, "qsp", |r| r.total_bits == tb);
        report.push(format!("B_T={tb}: {qiht:.2}/{qcosamp:.2}/{qsp:.2}"));
        if qiht < qcosamp || qiht < qsp {
            fail(
                NAME,
                &format!("at budget {tb}, QIHT ({qiht:.2} dB) trails QCoSaMP ({qcosamp:.2}) or QSP ({qsp:.2})"),
            );
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 1200.0 {
        fail(NAME, &format!("budget is 20 min, took {elapsed:.0} s"));
    }
    pass(NAME, start, &format!("mean RSNR qiht/qcosamp/qsp: {}", report.join(", ")));
}

// ---------------------------------------------------------------- 4

/// At four bits the pursuit projection should pay off in the small-budget
/// regime: pooled over B_T in {500, 1000}, mean QCoSaMP RSNR must match
/// or beat mean QIHT RSNR. Soft line: a pooled shortfall under 1 dB warns
/// instead of failing. The two methods cross somewhere in this budget
/// range, so per-budget means are reported and a reversal inside the set
/// warns without failing the regime claim.
#[test]
fn criterion_4_four_bit_low_budget_ordering() {
    const NAME: &str = "criterion 4 (4-bit low budget)";
    let start = Instant::now();
    let grid = SweepGrid {
        n: 1000,
        sparsity_levels: vec![10],
        total_bits: vec![500, 1000],
        isnr_levels: vec![f64::INFINITY],
        bit_depths: vec![4],
        corruption_fractions: vec![0.0],
        trials: 40,
        algorithms: vec![Algorithm::Qiht, Algorithm::Qcosamp],
    };
    let rows = sweep(&grid, 4);

    let mut report = Vec::new();
    let mut warned = false;
    let (mut pooled_qiht, mut pooled_qcosamp) = (0.0, 0.0);
    for &tb in &grid.total_bits {
        let qiht = mean_of(&rows, "qiht", |r| r.total_bits == tb);
        let qcosamp = mean_of(&rows, "qcosamp", |r| r.total_bits == tb);
        pooled_qiht += qiht;
        pooled_qcosamp += qcosamp;
        report.push(format!("B_T={tb}: {qcosamp:.2} vs {qiht:.2}"));
        if qcosamp < qiht {
            println!(
                "[WARN] {NAME}: QCoSaMP trails QIHT by {:.2} dB at budget {tb}",
                qiht - qcosamp
            );
            warned = true;
        }
    }
    pooled_qiht /= grid.total_bits.len() as f64;
    pooled_qcosamp /= grid.total_bits.len() as f64;

    let shortfall = pooled_qiht - pooled_qcosamp;
    if shortfall > 0.0 && shortfall < 1.0 {
        println!("[WARN] {NAME}: pooled QCoSaMP trails by {shortfall:.2} dB (under the 1 dB fail line)");
        warned = true;
    } else if shortfall >= 1.0 {
        fail(
            NAME,
            &format!(
                "pooled QCoSaMP ({pooled_qcosamp:.2} dB) trails QIHT ({pooled_qiht:.2} dB) by {shortfall:.2} dB"
            ),
        );
    }

    let detail = format!(
        "pooled qcosamp {pooled_qcosamp:.2} vs qiht {pooled_qiht:.2} dB; per budget: {}{}",
        report.join(", "),
        if warned { " [with warnings]" } else { "" }
    );
    pass(NAME, start, &detail);
}

// ---------------------------------------------------------------- 5

/// Noise-regime catalog at desk scale: N = 500, 10 trials, K in 2..=16,
/// budgets {500, 1000, 2000, 5000, 10000}, depths 1..=4. In heavy noise
/// (ISNR 10 dB) the pursuit methods must take a strict majority of
/// best-algorithm cells; in light noise (ISNR 35 dB) the thresholding
/// methods must.
#[test]
fn criterion_5_noise_regime_catalog() {
    const NAME: &str = "criterion 5 (noise-regime catalog)";
    let start = Instant::now();
    let grid = SweepGrid {
        n: 500,
        sparsity_levels: vec![2, 4, 6, 8, 10, 12, 14, 16],
        total_bits: vec![500, 1000, 2000, 5000, 10000],
        isnr_levels: vec![35.0, 10.0],
        bit_depths: vec![1, 2, 3, 4],
        corruption_fractions: vec![0.0],
        trials: 10,
        algorithms: Algorithm::ALL.to_vec(),
    };
    let records = experiment::run_sweep(&grid, 5, &SweepSettings::default()).unwrap();
    let catalog = best_catalog(&records, &[GroupField::K, GroupField::TotalBits, GroupField::Isnr]);

    let cells_per_isnr = grid.sparsity_levels.len() * grid.total_bits.len();
    let mut tally = std::collections::BTreeMap::new();
    for row in &catalog {
        let isnr = row
            .key
            .iter()
            .find(|(f, _)| *f == GroupField::Isnr)
            .map(|(_, v)| *v)
            .unwrap();
        let counts = tally.entry(isnr as i64).or_insert((0usize, 0usize));
        match row.algorithm.as_str() {
            "qiht" | "aop-qiht" => counts.0 += 1,
            "qcosamp" | "qsp" => counts.1 += 1,
            other => fail(NAME, &format!("unknown algorithm {other} in catalog")),
        }
    }

    let (ht_35, pursuit_35) = tally[&35];
    let (ht_10, pursuit_10) = tally[&10];
    let majority = cells_per_isnr / 2 + 1;
    if pursuit_10 < majority {
        fail(
            NAME,
            &format!("at ISNR 10, pursuit methods won {pursuit_10}/{cells_per_isnr} cells (need {majority})"),
        );
    }
    if ht_35 < majority {
        fail(
            NAME,
            &format!("at ISNR 35, thresholding methods won {ht_35}/{cells_per_isnr} cells (need {majority})"),
        );
    }
    pass(
        NAME,
        start,
        &format!(
            "ISNR 10: pursuit {pursuit_10}/{cells_per_isnr} (ht {ht_10}); ISNR 35: thresholding {ht_35}/{cells_per_isnr} (pursuit {pursuit_35})"
        ),
    );
}

// ---------------------------------------------------------------- 6

/// At 12 bits the quantizer is effectively transparent, so every solver
/// should behave like its classical counterpart: RSNR above 40 dB in at
/// least 90 of 100 noiseless trials at N = 256, M = 128, K = 5.
#[test]
fn criterion_6_fine_quantization_recovery() {
    const NAME: &str = "criterion 6 (12-bit recovery)";
    let start = Instant::now();
    let cell = Cell::from_measurements(256, 5, 12, 128, f64::INFINITY, 0.0);
    let settings = SweepSettings::default();

    let mut hits = std::collections::BTreeMap::new();
    for trial in 0..100 {
        let records =
            experiment::run_cell_trial(&cell, trial, &Algorithm::ALL, 6, &settings).unwrap();
        for r in records {
            *hits.entry(r.algorithm).or_insert(0usize) += usize::from(r.rsnr_db > 40.0);
        }
    }

    let mut report = Vec::new();
    for (alg, &count) in &hits {
        report.push(format!("{alg} {count}/100"));
        if count < 90 {
            fail(NAME, &format!("{alg} cleared 40 dB in only {count}/100 trials (need 90)"));
        }
    }
    pass(NAME, start, &format!("trials above 40 dB: {}", report.join(", ")));
}

// ---------------------------------------------------------------- 7

/// More bits, better recovery: mean 1-bit QIHT RSNR over 20 trials must
/// rise with the bit budget (Spearman rank correlation at least 0.9 over
/// budgets 500..10000), noiseless, N = 1000, K = 10.
#[test]
fn criterion_7_budget_monotonicity() {
    const NAME: &str = "criterion 7 (budget monotonicity)";
    let start = Instant::now();
    let budgets: Vec<u64> =
        vec![500, 1000, 2000, 3000, 4000, 5000, 6000, 7000, 8000, 9000, 10000];
    let grid = SweepGrid {
        n: 1000,
        sparsity_levels: vec![10],
        total_bits: budgets.clone(),
        isnr_levels: vec![f64::INFINITY],
        bit_depths: vec![1],
        corruption_fractions: vec![0.0],
        trials: 20,
        algorithms: vec![Algorithm::Qiht],
    };
    let rows = sweep(&grid, 7);

    let means: Vec<f64> = budgets
        .iter()
        .map(|&tb| mean_of(&rows, "qiht", |r| r.total_bits == tb))
        .collect();
    let xs: Vec<f64> = budgets.iter().map(|&tb| tb as f64).collect();
    let rho = spearman(&xs, &means);
    if rho < 0.9 {
        fail(
            NAME,
            &format!(
                "Spearman correlation {rho:.3} < 0.9; means were {:?}",
                means.iter().map(|m| (m * 100.0).round() / 100.0).collect::<Vec<_>>()
            ),
        );
    }
    let summary: Vec<String> = means.iter().map(|m| format!("{m:.1}")).collect();
    pass(NAME, start, &format!("Spearman {rho:.3}, means {} dB", summary.join("/")));
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &ix in &idx[i..=j] {
            out[ix] = midrank;
        }
        i = j + 1;
    }
    out
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for i in 0..x.len() {
        cov += (rx[i] - mx) * (ry[i] - my);
        vx += (rx[i] - mx).powi(2);
        vy += (ry[i] - my).powi(2);
    }
    cov / (vx * vy).sqrt()
}

// ---------------------------------------------------------------- 8

/// The cross-module invariants, re-checked in one fast pass: quantizer
/// monotonicity and idempotence, projection optimality and objective
/// monotonicity, exact hard thresholding on short vectors, the outlier
/// mask contract, seeded determinism, and byte-identical CSV output.
#[test]
fn criterion_8_invariant_suites() {
    const NAME: &str = "criterion 8 (invariant suites)";
    let start = Instant::now();

    // Quantizer: order-preserving and idempotent.
    for spec in [QuantizerSpec::sign(), QuantizerSpec::uniform(3, 3.0).unwrap()] {
        let mut rng = seeded_rng(81);
        let draws = gaussian_vector(&mut rng, 4000) * 2.0;
        let mut sorted: Vec<f64> = draws.iter().copied().collect();
        sorted.sort_by(f64::total_cmp);
        let mut prev = f64::NEG_INFINITY;
        for &z in &sorted {
            let q = spec.quantize_value(z);
            if q < prev {
                fail(NAME, "quantizer is not monotone");
            }
            if spec.quantize_value(q) != q {
                fail(NAME, "quantizer is not idempotent");
            }
            prev = q;
        }
    }

    // Projection: returned coefficients are a local minimum of the
    // distance to the consistency region, and the objective is
    // non-increasing in the iteration budget.
    let quantizer = Quantizer::Scalar(QuantizerSpec::uniform(2, 3.0).unwrap());
    let mut rng = seeded_rng(82);
    for _ in 0..10 {
        let phi_t = gaussian_matrix(&mut rng, 24, 4);
        let c_true = gaussian_vector(&mut rng, 4);
        let y = quantizer.quantize(&(&phi_t * &c_true + gaussian_vector(&mut rng, 24) * 0.1));
        let (lower, upper) = quantizer.region_bounds(&y).unwrap();
        let objective = |c: &DVector<f64>| {
            let image = &phi_t * c;
            (0..image.len())
                .map(|i| {
                    let gap = image[i] - image[i].clamp(lower[i], upper[i]);
                    gap * gap
                })
                .sum::<f64>()
                .sqrt()
        };

        let solved =
            projection::project_consistent(&phi_t, &y, &quantizer, ProjectionMode::Joint, 500, 1e-10)
                .unwrap();
        for i in 0..y.len() {
            let p = solved.consistent_point[i];
            if p < lower[i] - 1e-12 || p > upper[i] + 1e-12 {
                fail(NAME, "consistent point left its quantization region");
            }
        }
        // optimality of the final substep: the residual is orthogonal to
        // the fitted columns (the coefficients are the least-squares fit
        // to the returned point), and no small perturbation improves it
        if (phi_t.transpose() * &solved.residual).norm() > 1e-8 * solved.consistent_point.norm() {
            fail(NAME, "projection residual is not orthogonal to the fitted columns");
        }
        let fit = solved.residual.norm();
        for _ in 0..40 {
            let perturbed = &solved.coefficients + gaussian_vector(&mut rng, 4) * 1e-3;
            if (&solved.consistent_point - &phi_t * &perturbed).norm() < fit - 1e-12 {
                fail(NAME, "projection coefficients are not the least-squares fit");
            }
        }

        let mut prev = f64::INFINITY;
        for t in 1..=8 {
            let step =
                projection::project_consistent(&phi_t, &y, &quantizer, ProjectionMode::Joint, t, 0.0)
                    .unwrap();
            let obj = objective(&step.coefficients);
            if obj > prev + 1e-9 {
                fail(NAME, "projection objective increased with iteration budget");
            }
            prev = obj;
        }
    }

    // Hard thresholding: best k-term approximation, checked against every
    // subset on short vectors.
    let mut rng = seeded_rng(83);
    for n in 1..=8usize {
        for _ in 0..8 {
            let v = gaussian_vector(&mut rng, n);
            for k in 1..=n {
                let kept = hard_threshold(&v, k).unwrap();
                let kept_energy: f64 = kept.iter().map(|z| z * z).sum();
                for mask in 0..(1u32 << n) {
                    if mask.count_ones() as usize != k {
                        continue;
                    }
                    let energy: f64 = (0..n)
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| v[i] * v[i])
                        .sum();
                    if energy > kept_energy + 1e-12 {
                        fail(NAME, "hard_threshold missed a better support");
                    }
                }
            }
        }
    }

    // Outlier mask: exactly L dropped, and the kept set never holds a
    // penalty larger than a dropped one.
    let mut rng = seeded_rng(84);
    for _ in 0..20 {
        let penalties = gaussian_vector(&mut rng, 12).map(|z| (z.abs() - 0.8).max(0.0));
        for l in 0..=12usize {
            let mask = solvers::select_outliers(&penalties, l).unwrap();
            if mask.iter().filter(|&&keep| !keep).count() != l {
                fail(NAME, "outlier mask dropped the wrong number of entries");
            }
            let min_dropped = (0..12)
                .filter(|&i| !mask[i])
                .map(|i| penalties[i])
                .fold(f64::INFINITY, f64::min);
            let max_kept = (0..12)
                .filter(|&i| mask[i])
                .map(|i| penalties[i])
                .fold(f64::NEG_INFINITY, f64::max);
            if max_kept > min_dropped {
                fail(NAME, "outlier mask kept a larger penalty than it dropped");
            }
        }
        if solvers::select_outliers(&penalties, 13).is_ok() {
            fail(NAME, "outlier mask accepted a budget beyond the vector length");
        }
    }

    // Determinism: the same seeds reproduce every field but the wall clock.
    let cell = Cell::from_budget(48, 3, 2, 64, 25.0, 0.0).unwrap();
    let settings = SweepSettings::default();
    let a = experiment::run_cell_trial(&cell, 0, &Algorithm::ALL, 85, &settings).unwrap();
    let b = experiment::run_cell_trial(&cell, 0, &Algorithm::ALL, 85, &settings).unwrap();
    for (ra, rb) in a.iter().zip(&b) {
        let (mut ra, mut rb) = (ra.clone(), rb.clone());
        ra.runtime_ms = 0.0;
        rb.runtime_ms = 0.0;
        if ra != rb {
            fail(NAME, "identical seeds produced different records");
        }
    }

    // CSV: a rerun of the same sweep serializes byte-identically once the
    // runtime column is masked.
    let grid = SweepGrid {
        n: 24,
        sparsity_levels: vec![2],
        total_bits: vec![24, 48],
        isnr_levels: vec![f64::INFINITY],
        bit_depths: vec![1],
        corruption_fractions: vec![0.0],
        trials: 2,
        algorithms: Algorithm::ALL.to_vec(),
    };
    let first = experiment::run_sweep(&grid, 86, &settings).unwrap();
    let second = experiment::run_sweep(&grid, 86, &settings).unwrap();
    if csvio::mask_runtime(&csvio::records_to_string(&first))
        != csvio::mask_runtime(&csvio::records_to_string(&second))
    {
        fail(NAME, "rerun CSV differs beyond the runtime column");
    }

    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 60.0 {
        fail(NAME, &format!("budget is 60 s, took {elapsed:.0} s"));
    }
    pass(NAME, start, "quantizer, projection, thresholding, outlier mask, determinism, csv rerun");
}
