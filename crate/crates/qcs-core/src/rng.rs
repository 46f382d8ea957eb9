//! Deterministic randomness for the experiment harness.
//!
//! Every stochastic quantity in a sweep is a pure function of
//! (master seed, cell id, trial index). Trial seeds are derived by hashing
//! those three with SHA-256 under a versioned domain tag, then further
//! split into independent per-purpose streams (problem, noise, corruption)
//! the same way. The uniform source is ChaCha8, a counter-based generator,
//! so a stream can be reproduced from its seed alone; normals come from the
//! Box-Muller transform applied to pairs of uniforms.
//!
//! None of this is cryptographic in intent; the hash is there so that seeds
//! for neighboring cells and trials are statistically unrelated and stable
//! across refactors of the sweep loop.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Seed for one (cell, trial) pair. The cell id deliberately excludes the
/// algorithm: all algorithms see the same problem instance in a given cell
/// and trial, which is both the fair comparison and a big saving when
/// several solvers share one generated problem.
pub fn trial_seed(master_seed: u64, cell_id: &str, trial_index: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(b"qcs-trial-v1|");
    h.update(master_seed.to_le_bytes());
    h.update(b"|");
    h.update(cell_id.as_bytes());
    h.update(b"|");
    h.update((trial_index as u64).to_le_bytes());
    first_word(&h.finalize())
}

/// Splits a trial seed into independent streams, one per purpose
/// ("problem", "noise", "corrupt"). Adding noise must not perturb the
/// measurement matrix, so each purpose gets its own generator.
pub fn sub_seed(trial_seed: u64, domain: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(b"qcs-sub-v1|");
    h.update(trial_seed.to_le_bytes());
    h.update(b"|");
    h.update(domain.as_bytes());
    first_word(&h.finalize())
}

fn first_word(digest: &[u8]) -> u64 {
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One Box-Muller pair of independent standard normals. Consumes exactly
/// two uniforms; u1 is mapped into (0, 1] so the log is finite.
pub fn standard_normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

/// n i.i.d. standard normals. Draws in pairs; an odd tail discards the
/// second member of its final pair, keeping the stream layout a pure
/// function of n.
pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    let mut out = DVector::zeros(n);
    let mut i = 0;
    while i + 1 < n {
        let (a, b) = standard_normal_pair(rng);
        out[i] = a;
        out[i + 1] = b;
        i += 2;
    }
    if i < n {
        out[i] = standard_normal_pair(rng).0;
    }
    out
}

/// rows x cols matrix of i.i.d. standard normals, filled column-major (the
/// storage order), as one contiguous stream of rows*cols draws.
pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let flat = gaussian_vector(rng, rows * cols);
    DMatrix::from_column_slice(rows, cols, flat.as_slice())
}
