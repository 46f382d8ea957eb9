//! CSV input/output with a fixed, versioned schema.
//!
//! The record schema is the external contract of the whole toolkit; the
//! header below never changes shape without a version bump. runtime_ms is
//! the only column a rerun is allowed to change, so golden comparisons
//! mask it (see `mask_runtime`).

use anyhow::Context;
use qcs_core::catalog::CatalogRow;
use qcs_core::experiment::TrialRecord;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;
pub const RECORD_HEADER: [&str; 15] = [
    "schema_version",
    "algorithm",
    "bit_depth",
    "total_bits",
    "m",
    "n",
    "k",
    "isnr_db",
    "corruption",
    "trial",
    "seed",
    "rsnr_db",
    "iterations",
    "mismatch",
    "runtime_ms",
];

/// f64 -> CSV field. Rust's shortest-round-trip Display is deterministic,
/// and infinities become the literal `inf` (reading accepts both spellings).
pub fn format_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn parse_f64(field: &str, column: &'static str) -> anyhow::Result<f64> {
    field
        .parse::<f64>()
        .with_context(|| format!("column {column}: cannot parse '{field}' as a number"))
}

fn parse_int<T: std::str::FromStr>(field: &str, column: &'static str) -> anyhow::Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    field
        .parse::<T>()
        .with_context(|| format!("column {column}: cannot parse '{field}' as an integer"))
}

/// The records file as a string (header plus one row per record).
pub fn records_to_string(records: &[TrialRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RECORD_HEADER).expect("in-memory write");
    for r in records {
        w.write_record(&[
            SCHEMA_VERSION.to_string(),
            r.algorithm.clone(),
            r.bit_depth.to_string(),
            r.total_bits.to_string(),
            r.m.to_string(),
            r.n.to_string(),
            r.k.to_string(),
            format_f64(r.isnr_db),
            format_f64(r.corruption),
            r.trial_index.to_string(),
            r.seed.to_string(),
            format_f64(r.rsnr_db),
            r.iterations_run.to_string(),
            r.mismatch_count.to_string(),
            format_f64(r.runtime_ms),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

pub fn write_records(path: &Path, records: &[TrialRecord]) -> anyhow::Result<()> {
    std::fs::write(path, records_to_string(records))
        .with_context(|| format!("cannot create {}", path.display()))
}

pub fn read_records(path: &Path) -> anyhow::Result<Vec<TrialRecord>> {
    let mut rd = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let header = rd.headers().context("missing CSV header")?.clone();
    for (i, expected) in RECORD_HEADER.iter().enumerate() {
        match header.get(i) {
            Some(got) if got == *expected => {}
            Some(got) => anyhow::bail!(
                "schema mismatch in {}: column {} is '{got}', expected '{expected}'",
                path.display(),
                i + 1
            ),
            None => anyhow::bail!(
                "schema mismatch in {}: column '{expected}' is missing",
                path.display()
            ),
        }
    }
    if header.len() != RECORD_HEADER.len() {
        anyhow::bail!(
            "schema mismatch in {}: {} columns, expected {}",
            path.display(),
            header.len(),
            RECORD_HEADER.len()
        );
    }

    let mut out = Vec::new();
    for (line, row) in rd.records().enumerate() {
        let row = row.with_context(|| format!("{} row {}", path.display(), line + 2))?;
        let version: u32 = parse_int(&row[0], "schema_version")?;
        if version != SCHEMA_VERSION {
            anyhow::bail!("schema_version {version} unsupported (expected {SCHEMA_VERSION})");
        }
        out.push(TrialRecord {
            algorithm: row[1].to_string(),
            bit_depth: parse_int(&row[2], "bit_depth")?,
            total_bits: parse_int(&row[3], "total_bits")?,
            m: parse_int(&row[4], "m")?,
            n: parse_int(&row[5], "n")?,
            k: parse_int(&row[6], "k")?,
            isnr_db: parse_f64(&row[7], "isnr_db")?,
            corruption: parse_f64(&row[8], "corruption")?,
            trial_index: parse_int(&row[9], "trial")?,
            seed: parse_int(&row[10], "seed")?,
            rsnr_db: parse_f64(&row[11], "rsnr_db")?,
            iterations_run: parse_int(&row[12], "iterations")?,
            mismatch_count: parse_int(&row[13], "mismatch")?,
            runtime_ms: parse_f64(&row[14], "runtime_ms")?,
        });
    }
    Ok(out)
}

/// One summary row per (cell, algorithm): mean RSNR, its standard error,
/// and iteration/mismatch means. Deliberately no runtime column, so
/// summary files are byte-identical across reruns.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub bit_depth: u32,
    pub total_bits: u64,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub isnr_db: f64,
    pub corruption: f64,
    pub trials: usize,
    pub mean_rsnr_db: f64,
    pub stderr_rsnr_db: f64,
    pub mean_iterations: f64,
    pub mean_mismatch: f64,
}

pub const SUMMARY_HEADER: [&str; 14] = [
    "schema_version",
    "algorithm",
    "bit_depth",
    "total_bits",
    "m",
    "n",
    "k",
    "isnr_db",
    "corruption",
    "trials",
    "mean_rsnr_db",
    "stderr_rsnr_db",
    "mean_iterations",
    "mean_mismatch",
];

/// Collapses records into per-(cell, algorithm) summary rows, in record
/// order. Records are expected sorted (the sweep guarantees it); rows come
/// out in first-appearance order, which is then the same canonical order.
pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    let same_cell = |s: &SummaryRow, r: &TrialRecord| {
        s.algorithm == r.algorithm
            && s.bit_depth == r.bit_depth
            && s.total_bits == r.total_bits
            && s.m == r.m
            && s.n == r.n
            && s.k == r.k
            && s.isnr_db.to_bits() == r.isnr_db.to_bits()
            && s.corruption.to_bits() == r.corruption.to_bits()
    };
    for r in records {
        let idx = rows.iter().position(|s| same_cell(s, r));
        let idx = match idx {
            Some(i) => i,
            None => {
                rows.push(SummaryRow {
                    algorithm: r.algorithm.clone(),
                    bit_depth: r.bit_depth,
                    total_bits: r.total_bits,
                    m: r.m,
                    n: r.n,
                    k: r.k,
                    isnr_db: r.isnr_db,
                    corruption: r.corruption,
                    trials: 0,
                    mean_rsnr_db: 0.0,
                    stderr_rsnr_db: 0.0,
                    mean_iterations: 0.0,
                    mean_mismatch: 0.0,
                });
                groups.push(Vec::new());
                rows.len() - 1
            }
        };
        groups[idx].push(r.rsnr_db);
        rows[idx].trials += 1;
        rows[idx].mean_iterations += r.iterations_run as f64;
        rows[idx].mean_mismatch += r.mismatch_count as f64;
    }
    for (row, rsnrs) in rows.iter_mut().zip(&groups) {
        let n = rsnrs.len() as f64;
        row.mean_iterations /= n;
        row.mean_mismatch /= n;
        let mean = rsnrs.iter().sum::<f64>() / n;
        row.mean_rsnr_db = mean;
        row.stderr_rsnr_db = if rsnrs.len() < 2 || !mean.is_finite() {
            if mean.is_finite() {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            let var = rsnrs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        };
    }
    rows
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(SUMMARY_HEADER)?;
    for s in rows {
        w.write_record(&[
            SCHEMA_VERSION.to_string(),
            s.algorithm.clone(),
            s.bit_depth.to_string(),
            s.total_bits.to_string(),
            s.m.to_string(),
            s.n.to_string(),
            s.k.to_string(),
            format_f64(s.isnr_db),
            format_f64(s.corruption),
            s.trials.to_string(),
            format_f64(s.mean_rsnr_db),
            format_f64(s.stderr_rsnr_db),
            format_f64(s.mean_iterations),
            format_f64(s.mean_mismatch),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary(path: &Path) -> anyhow::Result<Vec<SummaryRow>> {
    let mut rd = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let header = rd.headers().context("missing CSV header")?.clone();
    for expected in SUMMARY_HEADER {
        if !header.iter().any(|h| h == expected) {
            anyhow::bail!(
                "schema mismatch in {}: column '{expected}' is missing",
                path.display()
            );
        }
    }
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (c_alg, c_b, c_tb, c_m, c_n, c_k) = (
        col("algorithm"),
        col("bit_depth"),
        col("total_bits"),
        col("m"),
        col("n"),
        col("k"),
    );
    let (c_isnr, c_corr, c_trials, c_mean, c_se, c_it, c_mm) = (
        col("isnr_db"),
        col("corruption"),
        col("trials"),
        col("mean_rsnr_db"),
        col("stderr_rsnr_db"),
        col("mean_iterations"),
        col("mean_mismatch"),
    );
    let mut out = Vec::new();
    for (line, row) in rd.records().enumerate() {
        let row = row.with_context(|| format!("{} row {}", path.display(), line + 2))?;
        out.push(SummaryRow {
            algorithm: row[c_alg].to_string(),
            bit_depth: parse_int(&row[c_b], "bit_depth")?,
            total_bits: parse_int(&row[c_tb], "total_bits")?,
            m: parse_int(&row[c_m], "m")?,
            n: parse_int(&row[c_n], "n")?,
            k: parse_int(&row[c_k], "k")?,
            isnr_db: parse_f64(&row[c_isnr], "isnr_db")?,
            corruption: parse_f64(&row[c_corr], "corruption")?,
            trials: parse_int(&row[c_trials], "trials")?,
            mean_rsnr_db: parse_f64(&row[c_mean], "mean_rsnr_db")?,
            stderr_rsnr_db: parse_f64(&row[c_se], "stderr_rsnr_db")?,
            mean_iterations: parse_f64(&row[c_it], "mean_iterations")?,
            mean_mismatch: parse_f64(&row[c_mm], "mean_mismatch")?,
        });
    }
    Ok(out)
}

/// Catalog CSV: schema_version, the group fields (dynamic), then the
/// winning configuration.
pub fn write_catalog(path: &Path, rows: &[CatalogRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    let mut header = vec!["schema_version".to_string()];
    if let Some(first) = rows.first() {
        header.extend(first.key.iter().map(|(f, _)| f.name().to_string()));
    }
    header.extend(["algorithm", "bit_depth", "mean_rsnr_db", "trials"].map(String::from));
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![SCHEMA_VERSION.to_string()];
        rec.extend(row.key.iter().map(|(_, v)| format_f64(*v)));
        rec.push(row.algorithm.clone());
        rec.push(row.bit_depth.to_string());
        rec.push(format_f64(row.mean_rsnr));
        rec.push(row.trial_count.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Replaces the runtime_ms column with a fixed marker so two record files
/// can be compared byte-for-byte.
pub fn mask_runtime(csv_text: &str) -> String {
    let mut out = String::with_capacity(csv_text.len());
    for (i, line) in csv_text.lines().enumerate() {
        if i == 0 || line.is_empty() {
            out.push_str(line);
        } else {
            match line.rfind(',') {
                Some(pos) => {
                    out.push_str(&line[..pos]);
                    out.push_str(",-");
                }
                None => out.push_str(line),
            }
        }
        out.push('\n');
    }
    out
}
