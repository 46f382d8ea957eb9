//! Dense linear-algebra and sparsity kernels shared by the solvers: top-K
//! support selection, hard thresholding, column restriction, minimum-norm
//! least squares, normalization, and the operator norm.
//!
//! Everything here is 64-bit floating point and pure; matrices are immutable
//! after construction.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector, Dyn};

// ---------------------------------------------------------------------------
// IndexSet
// ---------------------------------------------------------------------------

/// A sorted set of distinct column indices (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    /// Builds from arbitrary indices; sorts and deduplicates.
    pub fn from_unsorted(mut v: Vec<usize>) -> Self {
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }

    /// Builds from indices already strictly increasing.
    pub fn from_sorted(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]), "indices must be strictly increasing");
        IndexSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Sorted union of two sets.
    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (0, 0);
        while a < self.0.len() && b < other.0.len() {
            match self.0[a].cmp(&other.0[b]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[a]);
                    a += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[b]);
                    b += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(self.0[a]);
                    a += 1;
                    b += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[a..]);
        out.extend_from_slice(&other.0[b..]);
        IndexSet(out)
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Indices of the nonzero entries of x.
pub fn support(x: &DVector<f64>) -> IndexSet {
    IndexSet(
        x.iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, _)| i)
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// top-K selection and hard thresholding
// ---------------------------------------------------------------------------

/// The K largest-magnitude entries of x; magnitude ties go to the lowest
/// index, which keeps every downstream algorithm deterministic.
pub fn top_support(x: &DVector<f64>, k: usize) -> Result<IndexSet> {
    if k == 0 || k > x.len() {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: format!("k must be in 1..={}, got {k}", x.len()),
        });
    }
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_unstable_by(|&a, &b| {
        x[b].abs()
            .partial_cmp(&x[a].abs())
            .expect("entries must not be NaN")
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    Ok(IndexSet::from_unsorted(idx))
}

/// Hard thresholding eta_K: keep the K largest-magnitude entries, zero the
/// rest.
pub fn hard_threshold(x: &DVector<f64>, k: usize) -> Result<DVector<f64>> {
    let t = top_support(x, k)?;
    let mut out = DVector::zeros(x.len());
    for &i in t.iter() {
        out[i] = x[i];
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// column restriction
// ---------------------------------------------------------------------------

/// The M x |T| matrix of the selected columns, in T's (ascending) order.
/// T may be empty; the result then has zero columns.
pub fn restrict_columns(phi: &DMatrix<f64>, t: &IndexSet) -> Result<DMatrix<f64>> {
    for &i in t.iter() {
        if i >= phi.ncols() {
            return Err(Error::IndexOutOfRange {
                index: i,
                bound: phi.ncols(),
            });
        }
    }
    Ok(phi.select_columns(t.iter()))
}

/// Scatter coefficients over T back into an n-dimensional vector.
pub fn embed(coeffs: &DVector<f64>, t: &IndexSet, n: usize) -> DVector<f64> {
    debug_assert_eq!(coeffs.len(), t.len());
    let mut out = DVector::zeros(n);
    for (c, &i) in coeffs.iter().zip(t.iter()) {
        out[i] = *c;
    }
    out
}

// ---------------------------------------------------------------------------
// least squares
// ---------------------------------------------------------------------------

/// Singular values below max_sv * RCOND count as zero when inverting.
const LSTSQ_RCOND: f64 = 1e-12;

/// A factored least-squares solver. The factorization is the expensive part,
/// so callers that re-solve against the same matrix (the alternating
/// projection does) factor once and call `solve` repeatedly.
pub struct LstSq {
    svd: Option<nalgebra::SVD<f64, Dyn, Dyn>>,
    cutoff: f64,
    ncols: usize,
}

impl LstSq {
    pub fn factor(a: &DMatrix<f64>) -> LstSq {
        let ncols = a.ncols();
        if a.nrows() == 0 || ncols == 0 {
            return LstSq {
                svd: None,
                cutoff: 0.0,
                ncols,
            };
        }
        let svd = a.clone().svd(true, true);
        let max_sv = svd.singular_values.max();
        LstSq {
            svd: Some(svd),
            cutoff: max_sv * LSTSQ_RCOND,
            ncols,
        }
    }

    /// Minimum-norm least-squares solution (pseudo-inverse applied to b).
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        match &self.svd {
            Some(svd) => svd
                .solve(b, self.cutoff)
                .expect("SVD was computed with both U and V"),
            None => DVector::zeros(self.ncols),
        }
    }
}

/// Minimum-norm least-squares solution of A x = b. Rank deficiency is fine:
/// singular directions are dropped, which is what makes the solution the
/// minimum-norm one. The residual b - A x is orthogonal to range(A).
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "least_squares",
            expected: a.nrows(),
            actual: b.len(),
        });
    }
    Ok(LstSq::factor(a).solve(b))
}

// ---------------------------------------------------------------------------
// normalization
// ---------------------------------------------------------------------------

/// Projection to the unit sphere; the zero vector maps to itself (callers
/// flag that as a degenerate reconstruction instead of dividing by zero).
pub fn normalize(x: &DVector<f64>) -> DVector<f64> {
    let n = x.norm();
    if n == 0.0 {
        x.clone()
    } else {
        x / n
    }
}

// ---------------------------------------------------------------------------
// operator norm
// ---------------------------------------------------------------------------

/// Hard cap on power iterations; hit only on pathologically flat spectra,
/// in which case the current estimate is returned.
const OPNORM_MAX_ITERS: usize = 10_000;

/// Largest singular value of a, via power iteration on a^T a, run until the
/// estimate's relative change drops below `tol`.
pub fn operator_norm(a: &DMatrix<f64>, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tolerance",
            reason: format!("tolerance must be > 0, got {tol}"),
        });
    }
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }

    // Deterministic generic start vector. A start exactly orthogonal to the
    // dominant singular vector would stall, so on a zero image we reseed.
    let mut seed = 0x9E3779B97F4A7C15u64;
    let mut v = pseudo_random_unit(a.ncols(), &mut seed);
    let mut sigma_prev = 0.0f64;
    for attempt in 0..4 {
        for _ in 0..OPNORM_MAX_ITERS {
            let w = a.tr_mul(&(a * &v)); // a^T (a v)
            let norm_w = w.norm();
            if norm_w == 0.0 {
                break; // v is in the null space; reseed below
            }
            // Rayleigh quotient of a^T a at unit v is ||a v||^2
            let sigma = v.dot(&w).max(0.0).sqrt();
            v = w / norm_w;
            if (sigma - sigma_prev).abs() <= tol * sigma {
                return Ok(sigma);
            }
            sigma_prev = sigma;
        }
        if sigma_prev > 0.0 {
            // iteration cap reached with a live estimate
            return Ok(sigma_prev);
        }
        let _ = attempt;
        v = pseudo_random_unit(a.ncols(), &mut seed);
    }
    // every probe landed in the null space; the matrix is zero
    Ok(0.0)
}

fn pseudo_random_unit(n: usize, seed: &mut u64) -> DVector<f64> {
    let v = DVector::from_fn(n, |_, _| splitmix64(seed) as f64 / u64::MAX as f64 - 0.5);
    let norm = v.norm();
    if norm == 0.0 {
        DVector::from_element(n, 1.0 / (n as f64).sqrt())
    } else {
        v / norm
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn arb_vector(max_len: usize) -> impl Strategy<Value = DVector<f64>> {
        proptest::collection::vec(-100.0f64..100.0, 1..=max_len).prop_map(DVector::from_vec)
    }

    proptest! {
        #[test]
        fn hard_threshold_sparsity_bound(x in arb_vector(24), k_raw in 1usize..24) {
            let k = k_raw.min(x.len());
            let eta = hard_threshold(&x, k).unwrap();
            prop_assert!(support(&eta).len() <= k);
        }

        #[test]
        fn hard_threshold_fixes_already_sparse(x in arb_vector(12), k_raw in 1usize..12) {
            let k = k_raw.min(x.len());
            let sparse = hard_threshold(&x, k).unwrap();
            // eta_K(x) has at most K nonzeros, so it is its own best K-term
            // approximation
            prop_assert_eq!(hard_threshold(&sparse, k).unwrap(), sparse);
        }

        #[test]
        fn normalize_returns_unit_or_zero(x in arb_vector(16)) {
            let n = normalize(&x).norm();
            prop_assert!(n == 0.0 || (n - 1.0).abs() < 1e-12);
        }
    }
}
