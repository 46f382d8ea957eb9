//! Plain-vector reference implementations of IHT, BIHT, CoSaMP, and SP.
//!
//! These exist to be compared against, not to be fast: no external
//! dependencies, explicit loops, and every iterate is returned so a test
//! can line up whole trajectories. Conventions are fixed and documented
//! because the comparisons depend on them:
//!
//! * hard thresholding keeps the K largest magnitudes, ties to the lower
//!   index;
//! * sign(0) is +1;
//! * least squares solves the normal equations by Gauss-Jordan with
//!   partial pivoting;
//! * IHT and BIHT start from Phi^T y normalized to unit norm, CoSaMP and
//!   SP start from zero.

/// Column-major dense matrix, the minimum needed here.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    /// data[r + c * rows]
    pub data: Vec<f64>,
}

impl Mat {
    pub fn from_column_slice(rows: usize, cols: usize, data: &[f64]) -> Mat {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data: data.to_vec() }
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r + c * self.rows]
    }

    /// Phi x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for c in 0..self.cols {
            let xc = x[c];
            if xc == 0.0 {
                continue;
            }
            for r in 0..self.rows {
                out[r] += self.at(r, c) * xc;
            }
        }
        out
    }

    /// Phi^T v
    pub fn tr_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for c in 0..self.cols {
            let mut acc = 0.0;
            for r in 0..self.rows {
                acc += self.at(r, c) * v[r];
            }
            out[c] = acc;
        }
        out
    }

    /// The submatrix of the given columns.
    pub fn columns(&self, idx: &[usize]) -> Mat {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &c in idx {
            assert!(c < self.cols);
            data.extend_from_slice(&self.data[c * self.rows..(c + 1) * self.rows]);
        }
        Mat { rows: self.rows, cols: idx.len(), data }
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|e| e * e).sum::<f64>().sqrt()
}

pub fn normalized(x: &[f64]) -> Vec<f64> {
    let n = norm(x);
    if n == 0.0 {
        x.to_vec()
    } else {
        x.iter().map(|e| e / n).collect()
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// sign with sign(0) = +1, matching a quantizer whose zero bin is the
/// non-negative one.
pub fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Indices of the k largest magnitudes, ascending; ties keep the lower
/// index. k = 0 or k > len panics (caller bug).
pub fn top_k(x: &[f64], k: usize) -> Vec<usize> {
    assert!(k >= 1 && k <= x.len(), "k = {k} outside 1..={}", x.len());
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| {
        x[b].abs()
            .partial_cmp(&x[a].abs())
            .expect("entries must not be NaN")
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Keeps the k largest magnitudes, zeroing the rest.
pub fn hard_threshold(x: &[f64], k: usize) -> Vec<f64> {
    let keep = top_k(x, k);
    let mut out = vec![0.0; x.len()];
    for i in keep {
        out[i] = x[i];
    }
    out
}

/// Least squares via the normal equations, solved by Gauss-Jordan with
/// partial pivoting. Adequate for the small well-conditioned systems the
/// reference algorithms produce.
pub fn least_squares(a: &Mat, y: &[f64]) -> Vec<f64> {
    assert_eq!(a.rows, y.len());
    let n = a.cols;
    if n == 0 {
        return Vec::new();
    }
    // G = A^T A, rhs = A^T y
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for r in 0..a.rows {
                acc += a.at(r, i) * a.at(r, j);
            }
            g[i * n + j] = acc;
        }
    }
    let mut rhs = a.tr_matvec(y);

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| g[p * n + col].abs().partial_cmp(&g[q * n + col].abs()).unwrap())
            .unwrap();
        if g[pivot * n + col].abs() < 1e-12 {
            // singular normal matrix: leave this coordinate at zero
            continue;
        }
        if pivot != col {
            for j in 0..n {
                g.swap(col * n + j, pivot * n + j);
            }
            rhs.swap(col, pivot);
        }
        let d = g[col * n + col];
        for j in 0..n {
            g[col * n + j] /= d;
        }
        rhs[col] /= d;
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = g[row * n + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                g[row * n + j] -= f * g[col * n + j];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    rhs
}

fn embed(coeffs: &[f64], support: &[usize], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (c, &i) in coeffs.iter().zip(support) {
        out[i] = *c;
    }
    out
}

fn merged_support(a: &[usize], b: &[f64]) -> Vec<usize> {
    let mut t: Vec<usize> = a.to_vec();
    t.extend(b.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i));
    t.sort_unstable();
    t.dedup();
    t
}

/// Iterative hard thresholding from x0 = normalize(Phi^T y). Returns the
/// raw (un-normalized) iterate after each of the `iters` updates.
pub fn iht(phi: &Mat, y: &[f64], k: usize, mu: f64, iters: usize) -> Vec<Vec<f64>> {
    let mut x = normalized(&phi.tr_matvec(y));
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        let image = phi.matvec(&x);
        let grad = phi.tr_matvec(&sub(y, &image));
        let a: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi + mu * gi).collect();
        x = hard_threshold(&a, k);
        out.push(x.clone());
    }
    out
}

/// Binary IHT: the residual is taken against sign(Phi x) instead of
/// Phi x. Same start and same return convention as `iht`.
pub fn biht(phi: &Mat, y: &[f64], k: usize, mu: f64, iters: usize) -> Vec<Vec<f64>> {
    let mut x = normalized(&phi.tr_matvec(y));
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        let image: Vec<f64> = phi.matvec(&x).iter().map(|&v| sign(v)).collect();
        let grad = phi.tr_matvec(&sub(y, &image));
        let a: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi + mu * gi).collect();
        x = hard_threshold(&a, k);
        out.push(x.clone());
    }
    out
}

/// CoSaMP from a0 = 0. Each iteration merges the top-2K proxy indices with
/// the current support, solves least squares there, and prunes to K.
/// Returns the pruned iterate after each iteration.
pub fn cosamp(phi: &Mat, y: &[f64], k: usize, iters: usize) -> Vec<Vec<f64>> {
    assert!(2 * k <= phi.cols, "CoSaMP needs 2K <= N");
    let mut a = vec![0.0; phi.cols];
    let mut v = y.to_vec();
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        let u = phi.tr_matvec(&v);
        let omega = top_k(&u, 2 * k);
        let t = merged_support(&omega, &a);
        let coeffs = least_squares(&phi.columns(&t), y);
        let b = embed(&coeffs, &t, phi.cols);
        a = hard_threshold(&b, k);
        v = sub(y, &phi.matvec(&a));
        out.push(a.clone());
    }
    out
}

/// Subspace pursuit. Keeps a size-K support; each iteration widens it by
/// the top-K residual-proxy indices, refits, re-selects K, and accepts the
/// new support only if the refit residual shrank, stopping otherwise (and
/// on support stagnation). Returns the refit estimate on the accepted
/// support after each completed iteration.
pub fn sp(phi: &Mat, y: &[f64], k: usize, iters: usize) -> Vec<Vec<f64>> {
    let refit = |t: &[usize]| -> (Vec<f64>, f64) {
        let coeffs = least_squares(&phi.columns(t), y);
        let est = embed(&coeffs, t, phi.cols);
        let r = sub(y, &phi.matvec(&est));
        (est, norm(&r))
    };

    let mut t = top_k(&phi.tr_matvec(y), k);
    let (mut est, mut res_norm) = refit(&t);
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        if res_norm == 0.0 {
            break;
        }
        let residual = sub(y, &phi.matvec(&est));
        let proxy = top_k(&phi.tr_matvec(&residual), k);
        let widened = merged_support(&proxy, &embed(&vec![1.0; t.len()], &t, phi.cols));
        let coeffs = least_squares(&phi.columns(&widened), y);
        let candidate = top_k(&embed(&coeffs, &widened, phi.cols), k);
        let (cand_est, cand_norm) = refit(&candidate);
        if cand_norm > res_norm {
            break; // candidate is worse: keep the previous support
        }
        let stagnated = candidate == t;
        t = candidate;
        est = cand_est;
        res_norm = cand_norm;
        out.push(est.clone());
        if stagnated {
            break;
        }
    }
    out.push(est);
    out
}
