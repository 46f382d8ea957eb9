//! Sweep configuration: a TOML file mirroring the sweep grid plus solver
//! knobs. Unknown keys are rejected so a typo cannot silently fall back
//! to a default mid-experiment.

use anyhow::Context;
use qcs_core::experiment::{SweepGrid, SweepSettings};
use qcs_core::projection::ProjectionMode;
use qcs_core::solvers::{Algorithm, StepSize};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub k: Vec<usize>,
    pub total_bits: Vec<u64>,
    pub bits: Vec<u32>,
    /// ISNR levels in dB; `inf` means noiseless.
    #[serde(default = "default_isnr")]
    pub isnr: Vec<f64>,
    #[serde(default = "default_corruption")]
    pub corruption: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub algorithms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// "joint" or "literal".
    #[serde(default = "default_projection")]
    pub projection: String,
    /// Absent means the automatic 1/||Phi||^2 step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Absent means each algorithm's own default budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default = "default_true")]
    pub consistency_stop: bool,
    #[serde(default = "default_true")]
    pub prune: bool,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_isnr() -> Vec<f64> {
    vec![f64::INFINITY]
}
fn default_corruption() -> Vec<f64> {
    vec![0.0]
}
fn default_trials() -> usize {
    20
}
fn default_projection() -> String {
    "joint".into()
}
fn default_true() -> bool {
    true
}
fn default_alpha() -> f64 {
    3.0
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            projection: default_projection(),
            mu: None,
            max_iters: None,
            consistency_stop: true,
            prune: true,
            alpha: default_alpha(),
        }
    }
}

pub fn parse_projection(s: &str) -> Result<ProjectionMode, String> {
    match s {
        "joint" => Ok(ProjectionMode::Joint),
        "literal" => Ok(ProjectionMode::PaperLiteral),
        other => Err(format!("projection: expected 'joint' or 'literal', got '{other}'")),
    }
}

impl RunConfig {
    /// The validated sweep grid this config describes. Errors name the
    /// offending key.
    pub fn grid(&self) -> Result<SweepGrid, String> {
        let mut algorithms = Vec::with_capacity(self.grid.algorithms.len());
        for name in &self.grid.algorithms {
            let alg: Algorithm = name
                .parse()
                .map_err(|_| format!("algorithms: '{name}' is not a sweep algorithm (expected qiht, aop-qiht, qcosamp, qsp)"))?;
            algorithms.push(alg);
        }
        let grid = SweepGrid {
            n: self.grid.n,
            sparsity_levels: self.grid.k.clone(),
            total_bits: self.grid.total_bits.clone(),
            isnr_levels: self.grid.isnr.clone(),
            bit_depths: self.grid.bits.clone(),
            corruption_fractions: self.grid.corruption.clone(),
            trials: self.grid.trials,
            algorithms,
        };
        grid.validate().map_err(|e| e.to_string())?;
        Ok(grid)
    }

    pub fn settings(&self) -> Result<SweepSettings, String> {
        if self.solver.alpha <= 0.0 {
            return Err(format!("alpha: must be positive, got {}", self.solver.alpha));
        }
        if let Some(mu) = self.solver.mu {
            if !(mu > 0.0) || !mu.is_finite() {
                return Err(format!("mu: must be a positive finite real, got {mu}"));
            }
        }
        if self.solver.max_iters == Some(0) {
            return Err("max_iters: must be at least 1".into());
        }
        Ok(SweepSettings {
            projection_mode: parse_projection(&self.solver.projection)?,
            step_size: match self.solver.mu {
                Some(mu) => StepSize::Fixed(mu),
                None => StepSize::Auto,
            },
            max_iterations: self.solver.max_iters,
            consistency_stop: self.solver.consistency_stop,
            prune: self.solver.prune,
            alpha: self.solver.alpha,
            outlier_budget: None,
        })
    }

    /// Parse + full validation in one step.
    pub fn validate(&self) -> Result<(), String> {
        self.grid()?;
        self.settings()?;
        Ok(())
    }
}

pub fn parse_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let config: RunConfig =
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
    config
        .validate()
        .map_err(|key| anyhow::anyhow!("invalid config {}: {key}", path.display()))?;
    Ok(config)
}

pub fn serialize_config(config: &RunConfig) -> String {
    toml::to_string_pretty(config).expect("config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        master_seed = 7
        [grid]
        n = 100
        k = [5]
        total_bits = [200]
        bits = [1]
        algorithms = ["qiht"]
    "#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c: RunConfig = toml::from_str(MINIMAL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.grid.trials, 20);
        assert_eq!(c.grid.isnr, vec![f64::INFINITY]);
        assert_eq!(c.grid.corruption, vec![0.0]);
        assert_eq!(c.solver.projection, "joint");
        assert_eq!(c.solver.mu, None);
        assert_eq!(c.solver.alpha, 3.0);
        let s = c.settings().unwrap();
        assert_eq!(s.step_size, StepSize::Auto);
        assert_eq!(s.projection_mode, ProjectionMode::Joint);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let bad = format!("{MINIMAL}\n[solver]\nstep = 0.1\n");
        let err = toml::from_str::<RunConfig>(&bad).unwrap_err().to_string();
        assert!(err.contains("step"), "error should name the key: {err}");
    }

    #[test]
    fn zero_bits_error_names_the_key() {
        let bad = MINIMAL.replace("bits = [1]", "bits = [0]");
        let c: RunConfig = toml::from_str(&bad).unwrap();
        let err = c.validate().unwrap_err();
        assert!(err.contains("bits"), "{err}");
    }

    #[test]
    fn inf_is_a_legal_isnr_literal() {
        let cfg = MINIMAL.replace("algorithms", "isnr = [inf, 20.0]\nalgorithms");
        let c: RunConfig = toml::from_str(&cfg).unwrap();
        assert!(c.grid.isnr[0].is_infinite());
        assert_eq!(c.grid.isnr[1], 20.0);
    }

    #[test]
    fn classical_names_are_not_sweepable() {
        let cfg = MINIMAL.replace("[\"qiht\"]", "[\"biht\"]");
        let c: RunConfig = toml::from_str(&cfg).unwrap();
        let err = c.validate().unwrap_err();
        assert!(err.contains("biht"), "{err}");
    }

    #[test]
    fn round_trip_preserves_the_config() {
        let big = r#"
            master_seed = 42
            out_dir = "results"
            [grid]
            n = 500
            k = [2, 4, 6]
            total_bits = [500, 1000]
            bits = [1, 2, 3, 4]
            isnr = [inf, 35.0, 10.0]
            corruption = [0.0, 0.05]
            trials = 10
            algorithms = ["qiht", "aop-qiht", "qcosamp", "qsp"]
            [solver]
            projection = "literal"
            mu = 0.002
            max_iters = 150
            consistency_stop = false
            prune = false
            alpha = 2.5
        "#;
        let first: RunConfig = toml::from_str(big).unwrap();
        first.validate().unwrap();
        let second: RunConfig = toml::from_str(&serialize_config(&first)).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn settings_outlier_budget_defaults_to_none() {
        let c: RunConfig = toml::from_str(MINIMAL).unwrap();
        assert_eq!(c.settings().unwrap().outlier_budget, None);
    }
}
