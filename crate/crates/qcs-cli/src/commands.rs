//! The four subcommands. Everything user-facing funnels through
//! `CliError`: `Usage` exits 2 (bad flags, bad config, bad input files),
//! `Internal` exits 1 (output IO and anything that indicates a bug).

use crate::config::{self, parse_projection};
use crate::csvio;
use crate::plot;
use anyhow::Context;
use clap::Args;
use qcs_core::catalog::{best_catalog, CatalogRow, GroupField};
use qcs_core::experiment::{run_cell_trial, sort_records, Cell, SweepSettings, TrialRecord};
use qcs_core::solvers::{Algorithm, StepSize};
use rayon::prelude::*;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Internal(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Internal(e) => format!("{e:#}"),
        }
    }
}

impl From<qcs_core::Error> for CliError {
    fn from(e: qcs_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct RunArgs {
    /// qiht, aop-qiht, qcosamp, qsp, or a debug variant (iht, biht, cosamp, sp)
    #[arg(long)]
    pub alg: String,
    /// Signal dimension N
    #[arg(long)]
    pub n: usize,
    /// Measurement count M (alternative to --total-bits)
    #[arg(long)]
    pub m: Option<usize>,
    /// Bit budget T_B; M becomes floor(T_B / B)
    #[arg(long)]
    pub total_bits: Option<u64>,
    /// Bit depth B (1 = sign quantizer)
    #[arg(long)]
    pub bits: Option<u32>,
    /// Sparsity K
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Measurement ISNR in dB; inf = noiseless
    #[arg(long, default_value_t = f64::INFINITY)]
    pub isnr: f64,
    /// Fraction of measurements whose sign is flipped before quantization
    #[arg(long, default_value_t = 0.0)]
    pub corruption: f64,
    /// Consistent-projection mode: joint or literal
    #[arg(long, default_value = "joint")]
    pub projection: String,
    /// Fixed gradient step; omit for the automatic 1/||Phi||^2
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// AOP outlier budget; omit to use the true corruption count
    #[arg(long)]
    pub outlier_budget: Option<usize>,
    /// Keep merged supports unpruned in QCoSaMP
    #[arg(long)]
    pub no_prune: bool,
    /// Trial index fed into seed derivation
    #[arg(long, default_value_t = 0)]
    pub trial: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RunVariant {
    Quantized,
    OneBit,
    Unquantized,
}

fn parse_run_algorithm(name: &str) -> Result<(Algorithm, RunVariant), CliError> {
    match name {
        "qiht" | "aop-qiht" | "qcosamp" | "qsp" => {
            Ok((name.parse().expect("family name"), RunVariant::Quantized))
        }
        "biht" => Ok((Algorithm::Qiht, RunVariant::OneBit)),
        "iht" => Ok((Algorithm::Qiht, RunVariant::Unquantized)),
        "cosamp" => Ok((Algorithm::Qcosamp, RunVariant::Unquantized)),
        "sp" => Ok((Algorithm::Qsp, RunVariant::Unquantized)),
        other => Err(usage(format!(
            "unknown algorithm '{other}' (expected qiht, aop-qiht, qcosamp, qsp, iht, biht, cosamp, sp)"
        ))),
    }
}

fn run_cell(args: &RunArgs) -> Result<(Cell, Algorithm, RunVariant), CliError> {
    let (algorithm, variant) = parse_run_algorithm(&args.alg)?;
    let bit_depth = match (variant, args.bits) {
        (RunVariant::Quantized, Some(b)) => b,
        (RunVariant::Quantized, None) => {
            return Err(usage("--bits is required for quantized algorithms"))
        }
        (RunVariant::OneBit, None | Some(1)) => 1,
        (RunVariant::OneBit, Some(b)) => {
            return Err(usage(format!("biht is one-bit by definition; got --bits {b}")))
        }
        (RunVariant::Unquantized, None) => 0,
        (RunVariant::Unquantized, Some(_)) => {
            return Err(usage(format!("--bits does not apply to {}", args.alg)))
        }
    };
    if args.k == 0 {
        return Err(usage("sparsity must be at least 1"));
    }
    if args.k > args.n {
        return Err(usage("sparsity exceeds dimension"));
    }
    if !(args.isnr > 0.0) {
        return Err(usage(format!("--isnr must be positive or inf, got {}", args.isnr)));
    }
    if !(0.0..=1.0).contains(&args.corruption) {
        return Err(usage(format!("--corruption must be in [0, 1], got {}", args.corruption)));
    }
    let cell = match (args.m, args.total_bits) {
        (Some(_), Some(_)) => return Err(usage("give either --m or --total-bits, not both")),
        (None, None) => return Err(usage("one of --m or --total-bits is required")),
        (Some(m), None) => {
            if m == 0 {
                return Err(usage("--m must be at least 1"));
            }
            Cell::from_measurements(args.n, args.k, bit_depth, m, args.isnr, args.corruption)
        }
        (None, Some(tb)) => {
            if bit_depth == 0 {
                return Err(usage("unquantized runs need --m (a bit budget has no meaning)"));
            }
            Cell::from_budget(args.n, args.k, bit_depth, tb, args.isnr, args.corruption)?
        }
    };
    Ok((cell, algorithm, variant))
}

fn run_settings(args: &RunArgs) -> Result<SweepSettings, CliError> {
    Ok(SweepSettings {
        projection_mode: parse_projection(&args.projection).map_err(usage)?,
        step_size: match args.mu {
            Some(mu) => StepSize::Fixed(mu),
            None => StepSize::Auto,
        },
        max_iterations: args.max_iters,
        consistency_stop: true,
        prune: !args.no_prune,
        alpha: 3.0,
        outlier_budget: args.outlier_budget,
    })
}

pub fn cmd_run(args: &RunArgs, out: &mut impl Write) -> Result<(), CliError> {
    let (cell, algorithm, variant) = run_cell(args)?;
    let settings = run_settings(args)?;
    let mut record =
        qcs_core::experiment::run_trial(&cell, args.trial, algorithm, args.seed, &settings)?;
    if variant != RunVariant::Quantized {
        // the record reports what was actually run, not the family solver
        // it reduces to
        record.algorithm = args.alg.clone();
    }
    let emit = (|| -> anyhow::Result<()> {
        writeln!(
            out,
            "algorithm={} bit_depth={} total_bits={} m={} n={} k={} isnr_db={} corruption={} \
             trial={} seed={} rsnr_db={} iterations={} mismatch={} runtime_ms={}",
            record.algorithm,
            record.bit_depth,
            record.total_bits,
            record.m,
            record.n,
            record.k,
            csvio::format_f64(record.isnr_db),
            csvio::format_f64(record.corruption),
            record.trial_index,
            record.seed,
            csvio::format_f64(record.rsnr_db),
            record.iterations_run,
            record.mismatch_count,
            csvio::format_f64(record.runtime_ms),
        )?;
        write!(out, "{}", csvio::records_to_string(std::slice::from_ref(&record)))?;
        Ok(())
    })();
    emit.map_err(CliError::Internal)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// TOML sweep configuration
    #[arg(long)]
    pub config: PathBuf,
    /// Override the config's master_seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for records.csv and summary.csv
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Override the config's trial count
    #[arg(long)]
    pub trials: Option<usize>,
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let mut cfg = config::parse_config(&args.config).map_err(|e| usage(format!("{e:#}")))?;
    if let Some(t) = args.trials {
        cfg.grid.trials = t;
    }
    let grid = cfg.grid().map_err(usage)?;
    let settings = cfg.settings().map_err(usage)?;
    let master_seed = args.seed.unwrap_or(cfg.master_seed);
    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| usage(format!("cannot create {}: {e}", out_dir.display())))?;

    let cells = grid.cells()?;
    eprintln!(
        "sweep: {} cells x {} algorithms x {} trials (seed {master_seed})",
        cells.len(),
        grid.algorithms.len(),
        grid.trials
    );
    let started = Instant::now();
    let mut records: Vec<TrialRecord> = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        let cell_start = Instant::now();
        let batch: Result<Vec<Vec<TrialRecord>>, qcs_core::Error> = (0..grid.trials)
            .into_par_iter()
            .map(|t| run_cell_trial(cell, t, &grid.algorithms, master_seed, &settings))
            .collect();
        records.extend(batch?.into_iter().flatten());
        eprintln!(
            "[{}/{}] k={} tb={} b={} isnr={} corr={} ({:.1}s, total {:.0}s)",
            i + 1,
            cells.len(),
            cell.k,
            cell.total_bits,
            cell.bit_depth,
            csvio::format_f64(cell.isnr_db),
            csvio::format_f64(cell.corruption),
            cell_start.elapsed().as_secs_f64(),
            started.elapsed().as_secs_f64()
        );
    }
    sort_records(&mut records);

    let records_path = out_dir.join("records.csv");
    let summary_path = out_dir.join("summary.csv");
    csvio::write_records(&records_path, &records).map_err(CliError::Internal)?;
    csvio::write_summary(&summary_path, &csvio::summarize(&records))
        .map_err(CliError::Internal)?;
    eprintln!(
        "wrote {} ({} rows) and {}",
        records_path.display(),
        records.len(),
        summary_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// best
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct BestArgs {
    /// records.csv produced by sweep
    pub records: PathBuf,
    /// Comma-separated group fields (n, k, total_bits, isnr, corruption)
    #[arg(long, default_value = "total_bits,isnr")]
    pub group_by: String,
    /// Also write the catalog as CSV
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_best(args: &BestArgs, out: &mut impl Write) -> Result<(), CliError> {
    let records = csvio::read_records(&args.records).map_err(|e| usage(format!("{e:#}")))?;
    if records.is_empty() {
        return Err(usage(format!("{} has no data rows", args.records.display())));
    }
    let mut fields = Vec::new();
    for part in args.group_by.split(',') {
        let part = part.trim();
        fields.push(part.parse::<GroupField>().map_err(usage)?);
    }
    let rows = best_catalog(&records, &fields);
    let table = render_catalog_table(&rows);
    out.write_all(table.as_bytes())
        .map_err(|e| CliError::Internal(anyhow::Error::new(e)))?;
    if let Some(path) = &args.out {
        csvio::write_catalog(path, &rows).map_err(CliError::Internal)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

/// One aligned text grid per value of the last group field (the outer
/// variable); a single flat grid when grouping on one field.
fn render_catalog_table(rows: &[CatalogRow]) -> String {
    let mut out = String::new();
    let outer_split = rows.first().map(|r| r.key.len() > 1).unwrap_or(false);
    let mut current_outer: Option<u64> = None;
    let mut body: Vec<[String; 4]> = Vec::new();
    let flush = |out: &mut String, body: &mut Vec<[String; 4]>| {
        if body.is_empty() {
            return;
        }
        let mut widths = [0usize; 4];
        for row in body.iter() {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        for row in body.iter() {
            let line = format!(
                "{:<w0$}  {:<w1$}  {:<w2$}  {:>w3$}\n",
                row[0],
                row[1],
                row[2],
                row[3],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2],
                w3 = widths[3]
            );
            out.push_str(&line);
        }
        body.clear();
    };
    // Rows arrive sorted in group-by order; regroup them outer-major so
    // each section collects all its rows instead of reopening per change.
    let mut ordered: Vec<&CatalogRow> = rows.iter().collect();
    if outer_split {
        ordered.sort_by_key(|r| r.key.last().unwrap().1.to_bits());
    }
    for row in ordered {
        if outer_split {
            let (field, value) = *row.key.last().unwrap();
            if current_outer != Some(value.to_bits()) {
                flush(&mut out, &mut body);
                if current_outer.is_some() {
                    out.push('\n');
                }
                out.push_str(&format!("== {} = {} ==\n", field.name(), csvio::format_f64(value)));
                current_outer = Some(value.to_bits());
            }
        }
        let label_fields: &[(GroupField, f64)] = if outer_split {
            &row.key[..row.key.len() - 1]
        } else {
            &row.key[..]
        };
        let label = label_fields
            .iter()
            .map(|(f, v)| format!("{}={}", f.name(), csvio::format_f64(*v)))
            .collect::<Vec<_>>()
            .join(" ");
        body.push([
            label,
            format!("{} B={}", row.algorithm, row.bit_depth),
            format!("{} dB", round2(row.mean_rsnr)),
            format!("({} trials)", row.trial_count),
        ]);
    }
    flush(&mut out, &mut body);
    out
}

fn round2(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.2}")
    } else {
        csvio::format_f64(v)
    }
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// summary.csv produced by sweep
    pub summary: PathBuf,
    /// Output SVG path
    #[arg(long, default_value = "plot.svg")]
    pub out: PathBuf,
    /// Clip RSNR values above this many dB
    #[arg(long, default_value_t = plot::DEFAULT_CEILING_DB)]
    pub ceiling: f64,
    /// Keep only rows at this ISNR (dB, inf allowed)
    #[arg(long)]
    pub isnr: Option<f64>,
    /// Keep only rows at this corruption fraction
    #[arg(long)]
    pub corruption: Option<f64>,
    /// Keep only rows at this sparsity
    #[arg(long)]
    pub k: Option<usize>,
    /// Keep only rows for this algorithm
    #[arg(long)]
    pub alg: Option<String>,
    /// Keep only rows at this bit depth
    #[arg(long)]
    pub bits: Option<u32>,
    #[arg(long, default_value = "mean RSNR vs total bits")]
    pub title: String,
}

pub fn cmd_plot(args: &PlotArgs) -> Result<(), CliError> {
    let rows = csvio::read_summary(&args.summary).map_err(|e| usage(format!("{e:#}")))?;
    let rows: Vec<_> = rows
        .into_iter()
        .filter(|r| args.isnr.is_none_or(|v| r.isnr_db.to_bits() == v.to_bits()))
        .filter(|r| args.corruption.is_none_or(|v| r.corruption.to_bits() == v.to_bits()))
        .filter(|r| args.k.is_none_or(|v| r.k == v))
        .filter(|r| args.alg.as_ref().is_none_or(|v| &r.algorithm == v))
        .filter(|r| args.bits.is_none_or(|v| r.bit_depth == v))
        .collect();
    if rows.is_empty() {
        return Err(usage("no rows after filtering"));
    }
    let series = plot::build_series(&rows, args.ceiling);
    let svg = plot::render(&series, args.ceiling, &args.title);
    std::fs::write(&args.out, svg)
        .with_context(|| format!("cannot write {}", args.out.display()))
        .map_err(CliError::Internal)?;
    eprintln!("wrote {} ({} series)", args.out.display(), series.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_args() -> RunArgs {
        RunArgs {
            alg: "qiht".into(),
            n: 32,
            m: None,
            total_bits: Some(64),
            bits: Some(1),
            k: 3,
            seed: 5,
            isnr: f64::INFINITY,
            corruption: 0.0,
            projection: "joint".into(),
            mu: None,
            max_iters: None,
            outlier_budget: None,
            no_prune: false,
            trial: 0,
        }
    }

    #[test]
    fn run_resolves_m_from_the_bit_budget() {
        let (cell, alg, _) = run_cell(&base_args()).unwrap();
        assert_eq!(cell.m, 64);
        assert_eq!(alg, Algorithm::Qiht);
        let mut four_bit = base_args();
        four_bit.bits = Some(4);
        four_bit.total_bits = Some(500);
        assert_eq!(run_cell(&four_bit).unwrap().0.m, 125);
    }

    #[test]
    fn run_rejects_contradictory_measurement_flags() {
        let mut args = base_args();
        args.m = Some(10);
        let err = run_cell(&args).unwrap_err();
        assert!(err.message().contains("not both"));
        assert_eq!(err.exit_code(), 2);

        let mut args = base_args();
        args.total_bits = None;
        assert!(run_cell(&args).unwrap_err().message().contains("required"));
    }

    #[test]
    fn run_rejects_oversparse_requests_with_the_documented_message() {
        let mut args = base_args();
        args.k = 2000;
        args.n = 1000;
        assert_eq!(run_cell(&args).unwrap_err().message(), "sparsity exceeds dimension");
    }

    #[test]
    fn classical_variants_map_onto_family_solvers() {
        let mut args = base_args();
        args.alg = "iht".into();
        args.bits = None;
        args.m = Some(16);
        args.total_bits = None;
        let (cell, alg, variant) = run_cell(&args).unwrap();
        assert_eq!(cell.bit_depth, 0);
        assert_eq!(cell.total_bits, 0);
        assert_eq!(alg, Algorithm::Qiht);
        assert!(matches!(variant, RunVariant::Unquantized));

        args.alg = "biht".into();
        let (cell, _, _) = run_cell(&args).unwrap();
        assert_eq!(cell.bit_depth, 1);

        // a bit budget is meaningless without quantization
        args.alg = "sp".into();
        args.m = None;
        args.total_bits = Some(100);
        assert!(run_cell(&args).unwrap_err().message().contains("--m"));
    }

    #[test]
    fn cmd_run_emits_a_labeled_line_and_a_csv_row() {
        let mut buf = Vec::new();
        cmd_run(&base_args(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let labeled = lines.next().unwrap();
        assert!(labeled.starts_with("algorithm=qiht bit_depth=1 total_bits=64 m=64"));
        assert!(labeled.contains("isnr_db=inf"));
        let header = lines.next().unwrap();
        assert_eq!(header.split(',').count(), csvio::RECORD_HEADER.len());
        let row = lines.next().unwrap();
        assert!(row.starts_with("1,qiht,1,64,64,32,3,inf,0,0,"));
        assert!(lines.next().is_none());
    }

    #[test]
    fn cmd_run_output_is_deterministic_apart_from_runtime() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        cmd_run(&base_args(), &mut a).unwrap();
        cmd_run(&base_args(), &mut b).unwrap();
        let strip = |buf: &[u8]| {
            let text = String::from_utf8(buf.to_vec()).unwrap();
            text.lines()
                .map(|l| match l.rfind([',', ' ']) {
                    Some(p) => l[..p].to_string(),
                    None => l.to_string(),
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn catalog_table_renders_one_grid_per_outer_value() {
        use qcs_core::experiment::TrialRecord;
        let record = |tb: u64, isnr: f64, rsnr: f64| TrialRecord {
            algorithm: "qiht".into(),
            bit_depth: 1,
            total_bits: tb,
            m: tb as usize,
            n: 100,
            k: 5,
            isnr_db: isnr,
            corruption: 0.0,
            trial_index: 0,
            seed: 1,
            rsnr_db: rsnr,
            iterations_run: 10,
            mismatch_count: 0,
            runtime_ms: 1.0,
        };
        let records = vec![
            record(500, 10.0, 5.0),
            record(1000, 10.0, 8.0),
            record(500, 35.0, 12.0),
            record(1000, 35.0, 15.0),
        ];
        let rows = best_catalog(&records, &[GroupField::TotalBits, GroupField::Isnr]);
        let table = render_catalog_table(&rows);
        assert!(table.contains("== isnr_db = 10 =="), "{table}");
        assert!(table.contains("== isnr_db = 35 =="), "{table}");
        assert!(table.contains("total_bits=500"), "{table}");
        assert!(table.contains("qiht B=1"), "{table}");
    }
}
