//! Scalar quantizers: threshold partitions of the real line, quantization
//! regions, and projections onto them.
//!
//! A quantizer is a list of thresholds tau_1 < ... < tau_{Q+1} with
//! tau_1 = -inf and tau_{Q+1} = +inf, plus one level m_i per bin. A value z
//! maps to m_i exactly when tau_i <= z < tau_{i+1} (half-open bins, so a
//! value sitting on a threshold belongs to the upper bin; in particular the
//! sign quantizer sends 0 to +1).

use crate::{Error, Result};
use nalgebra::DVector;

/// Largest supported bit depth. 2^24 levels is already far past anything an
/// ADC model needs and keeps the level table comfortably in memory.
pub const MAX_BIT_DEPTH: u32 = 24;

/// Relative tolerance used when matching a measurement value against the
/// level table. Levels are constructed once and passed through unmodified,
/// so exact equality is the expected path; the tolerance is a safety net for
/// values that round-tripped through text serialization.
const LEVEL_MATCH_RTOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// QuantizerSpec
// ---------------------------------------------------------------------------

/// A scalar quantizer: Q = 2^B half-open bins with one reproduction level
/// inside each.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerSpec {
    /// Q+1 strictly increasing thresholds, first -inf, last +inf.
    thresholds: Vec<f64>,
    /// Q strictly increasing levels, m_i in [tau_i, tau_{i+1}).
    levels: Vec<f64>,
    bit_depth: u32,
}

/// The preimage of a level: the bin it reproduces, as an interval.
/// `lower` may be -inf and `upper` may be +inf (the two end bins).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lower: f64,
    pub upper: f64,
}

impl Region {
    /// Membership in the closure of the bin.
    pub fn contains_closed(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

impl QuantizerSpec {
    /// The 1-bit sign quantizer: thresholds (-inf, 0, +inf), levels (-1, +1).
    pub fn sign() -> Self {
        QuantizerSpec {
            thresholds: vec![f64::NEG_INFINITY, 0.0, f64::INFINITY],
            levels: vec![-1.0, 1.0],
            bit_depth: 1,
        }
    }

    /// Uniform midpoint quantizer with 2^bits bins covering [-saturation,
    /// saturation]. Interior thresholds are spaced 2*saturation/2^bits
    /// apart; each level is its bin's midpoint, and the two unbounded end
    /// bins keep the outermost midpoints (they saturate).
    pub fn uniform(bits: u32, saturation: f64) -> Result<Self> {
        if bits == 0 || bits > MAX_BIT_DEPTH {
            return Err(Error::InvalidParameter {
                name: "bits",
                reason: format!("bit depth must be in 1..={MAX_BIT_DEPTH}, got {bits}"),
            });
        }
        if !(saturation > 0.0) || !saturation.is_finite() {
            return Err(Error::InvalidParameter {
                name: "saturation",
                reason: format!("saturation must be a positive finite real, got {saturation}"),
            });
        }
        let q = 1usize << bits;
        let delta = 2.0 * saturation / q as f64;
        let mut thresholds = Vec::with_capacity(q + 1);
        thresholds.push(f64::NEG_INFINITY);
        for i in 1..q {
            thresholds.push(-saturation + i as f64 * delta);
        }
        thresholds.push(f64::INFINITY);
        let levels: Vec<f64> = (0..q)
            .map(|i| -saturation + delta / 2.0 + i as f64 * delta)
            .collect();
        Ok(QuantizerSpec {
            thresholds,
            levels,
            bit_depth: bits,
        })
    }

    // ---- accessors

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn bit_depth(&self) -> u32 {
        self.bit_depth
    }

    /// Number of bins, Q = 2^B.
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// The Q-1 finite thresholds, excluding the infinite sentinels.
    pub fn interior_thresholds(&self) -> &[f64] {
        &self.thresholds[1..self.thresholds.len() - 1]
    }

    // ---- quantization

    /// Quantize one value. NaN is rejected: it belongs to no bin.
    pub fn quantize_value(&self, z: f64) -> f64 {
        self.levels[self.bin_index(z)]
    }

    /// Componentwise quantization; every output entry is a level.
    pub fn quantize(&self, z: &DVector<f64>) -> DVector<f64> {
        z.map(|v| self.quantize_value(v))
    }

    fn bin_index(&self, z: f64) -> usize {
        assert!(!z.is_nan(), "cannot quantize NaN");
        // Count thresholds <= z; tau_1 = -inf guarantees at least one. The
        // clamp only matters for z = +inf, which falls in the top bin.
        let idx = self.thresholds.partition_point(|&t| t <= z) - 1;
        idx.min(self.levels.len() - 1)
    }

    // ---- regions

    /// The bin a level reproduces, as the half-open interval it came from.
    /// Values that are not levels of this quantizer are foreign (for
    /// example, measurements produced by a different quantizer) and are
    /// rejected.
    pub fn region_of(&self, level: f64) -> Result<Region> {
        let i = self.level_index(level)?;
        Ok(Region {
            lower: self.thresholds[i],
            upper: self.thresholds[i + 1],
        })
    }

    fn level_index(&self, level: f64) -> Result<usize> {
        if level.is_nan() {
            return Err(Error::NotALevel(level));
        }
        match self
            .levels
            .binary_search_by(|m| m.partial_cmp(&level).expect("levels are never NaN"))
        {
            Ok(i) => Ok(i),
            Err(insert) => {
                // Tolerant re-check against the two neighbors of the
                // insertion point.
                for i in [insert.wrapping_sub(1), insert] {
                    if let Some(&m) = self.levels.get(i) {
                        let scale = m.abs().max(level.abs());
                        if (m - level).abs() <= LEVEL_MATCH_RTOL * scale {
                            return Ok(i);
                        }
                    }
                }
                Err(Error::NotALevel(level))
            }
        }
    }

    /// Euclidean projection of z onto the box of regions selected by the
    /// level vector y: each z_k is clamped to the closure of y_k's bin. The
    /// closure is used because the half-open bin is not a closed set and the
    /// projection onto it may not exist; the difference is a measure-zero
    /// boundary, so quantize(output) = y except possibly on exact upper
    /// boundaries.
    pub fn clip_to_regions(&self, z: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        if z.len() != y.len() {
            return Err(Error::DimensionMismatch {
                context: "clip_to_regions",
                expected: y.len(),
                actual: z.len(),
            });
        }
        let mut out = z.clone();
        for k in 0..z.len() {
            let r = self.region_of(y[k])?;
            out[k] = z[k].clamp(r.lower, r.upper);
        }
        Ok(out)
    }

    /// Level-gap weights w_j = m_j - m_{j-1}, one per interior threshold
    /// (Q-1 entries, all positive).
    pub fn level_weights(&self) -> Vec<f64> {
        self.levels.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

// ---------------------------------------------------------------------------
// Quantizer: a spec or the identity map
// ---------------------------------------------------------------------------

/// Either a real scalar quantizer or the identity map.
///
/// The identity variant exists for the classical reductions: with it the
/// quantized solvers execute plain IHT/CoSaMP/SP updates, which the test
/// suite uses as an oracle and the CLI exposes for debugging. It has no
/// thresholds, and each measurement's "region" collapses to the measurement
/// itself.
#[derive(Debug, Clone, PartialEq)]
pub enum Quantizer {
    Scalar(QuantizerSpec),
    Identity,
}

impl From<QuantizerSpec> for Quantizer {
    fn from(spec: QuantizerSpec) -> Self {
        Quantizer::Scalar(spec)
    }
}

impl Quantizer {
    pub fn is_identity(&self) -> bool {
        matches!(self, Quantizer::Identity)
    }

    pub fn quantize_value(&self, z: f64) -> f64 {
        match self {
            Quantizer::Scalar(spec) => spec.quantize_value(z),
            Quantizer::Identity => z,
        }
    }

    pub fn quantize(&self, z: &DVector<f64>) -> DVector<f64> {
        match self {
            Quantizer::Scalar(spec) => spec.quantize(z),
            Quantizer::Identity => z.clone(),
        }
    }

    /// Empty for the identity map.
    pub fn interior_thresholds(&self) -> &[f64] {
        match self {
            Quantizer::Scalar(spec) => spec.interior_thresholds(),
            Quantizer::Identity => &[],
        }
    }

    /// Empty for the identity map.
    pub fn level_weights(&self) -> Vec<f64> {
        match self {
            Quantizer::Scalar(spec) => spec.level_weights(),
            Quantizer::Identity => Vec::new(),
        }
    }

    /// Closed region bounds (lower, upper) for each entry of the level
    /// vector y. For the identity map both bounds equal y itself.
    pub fn region_bounds(&self, y: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        match self {
            Quantizer::Scalar(spec) => {
                let mut lower = DVector::zeros(y.len());
                let mut upper = DVector::zeros(y.len());
                for k in 0..y.len() {
                    let r = spec.region_of(y[k])?;
                    lower[k] = r.lower;
                    upper[k] = r.upper;
                }
                Ok((lower, upper))
            }
            Quantizer::Identity => Ok((y.clone(), y.clone())),
        }
    }

    /// Number of entries where quantize(z) differs from the level vector y,
    /// i.e. the consistency Hamming distance ||y - f_Q(z)||_0.
    pub fn mismatch_count(&self, z: &DVector<f64>, y: &DVector<f64>) -> usize {
        debug_assert_eq!(z.len(), y.len());
        z.iter()
            .zip(y.iter())
            .filter(|(&zi, &yi)| self.quantize_value(zi) != yi)
            .count()
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
