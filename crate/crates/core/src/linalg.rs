//! Column-major dense design matrix and the few products the solver needs.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Dense `n × p` matrix stored column by column.
///
/// Columns are contiguous, so `X'r` is `p` contiguous dot products and `Xb`
/// only touches the columns where `b` is non-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Error::check_len("design matrix storage", rows * cols, data.len())?;
        Ok(DesignMatrix { rows, cols, data })
    }

    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Error::check_len("design matrix storage", rows * cols, data.len())?;
        let mut cm = alloc::vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                cm[j * rows + i] = data[i * cols + j];
            }
        }
        Ok(DesignMatrix {
            rows,
            cols,
            data: cm,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        DesignMatrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DesignMatrix {
            rows,
            cols,
            data: alloc::vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_column_major(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `out = X b`.
    pub fn mul_vec_into(&self, b: &[f64], out: &mut [f64]) {
        debug_assert_eq!(b.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, &bj) in b.iter().enumerate() {
            if bj != 0.0 {
                for (o, x) in out.iter_mut().zip(self.column(j)) {
                    *o += bj * x;
                }
            }
        }
    }

    pub fn mul_vec(&self, b: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.rows];
        self.mul_vec_into(b, &mut out);
        out
    }

    /// `out = X' r`.
    pub fn tr_mul_vec_into(&self, r: &[f64], out: &mut [f64]) {
        debug_assert_eq!(r.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (j, o) in out.iter_mut().enumerate() {
            *o = dot(self.column(j), r);
        }
    }

    pub fn tr_mul_vec(&self, r: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.cols];
        self.tr_mul_vec_into(r, &mut out);
        out
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators; lets the compiler vectorize without reassociation.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

#[inline]
pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

const KRYLOV_STEPS: usize = 30;
const KRYLOV_REL_TOL: f64 = 1e-6;
const LIPSCHITZ_INFLATION: f64 = 1.01;

/// Upper estimate of `‖X‖₂²`, the Lipschitz constant of the least-squares
/// gradient, inflated by 1%. Returns 0 for a zero matrix.
///
/// Lanczos on `X'X` with full reorthogonalization: at most 30 matrix-vector
/// pairs, stopping once the leading Ritz value moves by less than `1e-6`
/// relative. Plain power iteration with the same budget can be off by
/// several percent when the top singular values are close together.
pub fn estimate_lipschitz(x: &DesignMatrix) -> f64 {
    let p = x.cols();
    if p == 0 || x.rows() == 0 {
        return 0.0;
    }
    // Fixed, irregular start vector; a constant vector can be orthogonal to
    // the leading singular vector of structured designs.
    let mut q: Vec<f64> = (0..p)
        .map(|j| {
            let h = (j as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            1.0 + ((h >> 40) as f64) / ((1u64 << 24) as f64)
        })
        .collect();
    let nq = libm::sqrt(norm_sq(&q));
    q.iter_mut().for_each(|e| *e /= nq);

    let steps = KRYLOV_STEPS.min(p);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut xv = alloc::vec![0.0; x.rows()];
    let mut w = alloc::vec![0.0; p];
    let mut estimate = 0.0;
    for _ in 0..steps {
        x.mul_vec_into(&q, &mut xv);
        x.tr_mul_vec_into(&xv, &mut w);
        alpha.push(dot(&q, &w));
        basis.push(q);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
            }
        }
        let next = tridiagonal_max_eigenvalue(&alpha, &beta);
        let b = libm::sqrt(norm_sq(&w));
        let settled = estimate > 0.0 && (next - estimate).abs() <= KRYLOV_REL_TOL * next;
        estimate = next;
        if settled || b <= 1e-12 * estimate.max(f64::MIN_POSITIVE) {
            break;
        }
        beta.push(b);
        q = w.iter().map(|v| v / b).collect();
    }
    if estimate <= 0.0 {
        return 0.0;
    }
    LIPSCHITZ_INFLATION * estimate
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `a` and off-diagonal `b` (`b.len() + 1 == a.len()`), by Sturm bisection.
fn tridiagonal_max_eigenvalue(a: &[f64], b: &[f64]) -> f64 {
    let m = a.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = if i > 0 { b[i - 1].abs() } else { 0.0 } + if i + 1 < m { b[i].abs() } else { 0.0 };
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    let tiny = f64::EPSILON * (hi - lo).abs().max(f64::MIN_POSITIVE);
    // Number of eigenvalues strictly below `t`.
    let below = |t: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..m {
            let off = if i > 0 { b[i - 1] * b[i - 1] } else { 0.0 };
            d = a[i] - t - off / d;
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) == m {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
