//! Dense symmetric linear algebra for the penalized normal equations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Rows per chunk when accumulating cross products. Fixed so the reduction
/// order never depends on the number of worker threads.
const CROSS_CHUNK: usize = 256;

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

impl Cholesky {
    /// Factorizes a symmetric positive definite matrix. Only the lower
    /// triangle of `a` is read.
    pub fn new(a: &DMatrix<f64>) -> Option<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return None;
        }
        let mut l = a.clone();
        let data = l.as_mut_slice();
        // Left-looking, column-major: each update is an axpy on a
        // contiguous column tail.
        for j in 0..n {
            let (done, rest) = data.split_at_mut(j * n);
            let col_j = &mut rest[..n];
            for k in 0..j {
                let col_k = &done[k * n..(k + 1) * n];
                let ljk = col_k[j];
                if ljk == 0.0 {
                    continue;
                }
                for (d, s) in col_j[j..].iter_mut().zip(&col_k[j..]) {
                    *d -= ljk * s;
                }
            }
            let d = col_j[j];
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            col_j[j] = d;
            for v in &mut col_j[j + 1..] {
                *v /= d;
            }
        }
        for j in 0..n {
            for i in 0..j {
                l[(i, j)] = 0.0;
            }
        }
        Some(Cholesky { l })
    }

    /// Factorizes `a`, retrying once with `1e-10 · max(diag)` added to the
    /// diagonal when the plain factorization fails.
    pub fn with_ridge_retry(a: &DMatrix<f64>) -> Result<Self> {
        if let Some(c) = Cholesky::new(a) {
            return Ok(c);
        }
        let scale = (0..a.nrows()).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
        let ridge = 1e-10 * scale.max(1.0);
        let mut b = a.clone();
        for i in 0..b.nrows() {
            b[(i, i)] += ridge;
        }
        Cholesky::new(&b).ok_or_else(|| {
            Error::Numerical("penalized normal equations are not positive definite".into())
        })
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let l = self.l.as_slice();
        let mut x = b.clone();
        let xs = x.as_mut_slice();
        // forward: L z = b
        for j in 0..n {
            let xj = xs[j] / l[j * n + j];
            xs[j] = xj;
            let col = &l[j * n + j + 1..(j + 1) * n];
            for (xi, lij) in xs[j + 1..].iter_mut().zip(col) {
                *xi -= lij * xj;
            }
        }
        // backward: Lᵀ x = z
        for j in (0..n).rev() {
            let col = &l[j * n + j + 1..(j + 1) * n];
            let dot: f64 = col.iter().zip(&xs[j + 1..]).map(|(a, b)| a * b).sum();
            xs[j] = (xs[j] - dot) / l[j * n + j];
        }
        x
    }

    /// Explicit inverse `A⁻¹ = L⁻ᵀ L⁻¹`.
    pub fn inverse(&self) -> DMatrix<f64> {
        let n = self.dim();
        let l = self.l.as_slice();
        // M = L⁻¹, lower triangular, built column by column.
        let mut m = vec![0.0; n * n];
        for j in 0..n {
            let x = &mut m[j * n..(j + 1) * n];
            x[j] = 1.0;
            for k in j..n {
                let xk = x[k] / l[k * n + k];
                x[k] = xk;
                if xk == 0.0 {
                    continue;
                }
                let col = &l[k * n + k + 1..(k + 1) * n];
                for (xi, lik) in x[k + 1..].iter_mut().zip(col) {
                    *xi -= lik * xk;
                }
            }
        }
        // A⁻¹[i, j] = Σ_k M[k, i] M[k, j] over k ≥ max(i, j)
        let mut inv = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mj = &m[j * n + j..(j + 1) * n];
            for i in j..n {
                let mi = &m[i * n + i..(i + 1) * n];
                let s: f64 = mi.iter().zip(&mj[i - j..]).map(|(a, b)| a * b).sum();
                inv[(i, j)] = s;
                inv[(j, i)] = s;
            }
        }
        inv
    }
}

/// `XᵀX`, accumulated in fixed row chunks.
pub fn cross_product(x: &DMatrix<f64>, exec: Execution) -> DMatrix<f64> {
    let n = x.nrows();
    let p = x.ncols();
    let chunks = n.div_ceil(CROSS_CHUNK);
    let parts = exec.map_indexed(chunks, |c| {
        let start = c * CROSS_CHUNK;
        let rows = CROSS_CHUNK.min(n - start);
        let block = x.rows(start, rows);
        block.tr_mul(&block)
    });
    parts
        .into_iter()
        .fold(DMatrix::zeros(p, p), |acc, part| acc + part)
}

/// `Xᵀy`, accumulated in fixed row chunks.
pub fn cross_vector(x: &DMatrix<f64>, y: &DVector<f64>, exec: Execution) -> DVector<f64> {
    let n = x.nrows();
    let p = x.ncols();
    let chunks = n.div_ceil(CROSS_CHUNK);
    let parts = exec.map_indexed(chunks, |c| {
        let start = c * CROSS_CHUNK;
        let rows = CROSS_CHUNK.min(n - start);
        x.rows(start, rows).tr_mul(&y.rows(start, rows))
    });
    parts
        .into_iter()
        .fold(DVector::zeros(p), |acc, part| acc + part)
}

/// Moore–Penrose inverse of a symmetric matrix, discarding eigenvalues below
/// `rel_tol · max |eigenvalue|`.
pub fn symmetric_pinv(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = a.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = rel_tol * max;
    let mut out = DMatrix::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() > cutoff && lam.abs() > 0.0 {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / lam;
        }
    }
    out
}
