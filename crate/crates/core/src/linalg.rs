//! Minimal dense complex matrices with fixed-order products.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `A x`, each row summed left to right.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols, "dimension mismatch in matvec");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// `A^H y`.
    pub fn adjoint_matvec(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.rows, "dimension mismatch in adjoint_matvec");
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (i, &yi) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * yi;
            }
        }
        out
    }

    /// Square submatrix on the given row/column indices.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |i, j| self.get(idx[i], idx[j]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `l^p` norm of a complex vector, `p` in `[1, inf]`.
pub fn vector_pnorm(x: &[Complex64], p: f64) -> f64 {
    if p.is_infinite() {
        return x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    // scale by the max entry to keep |x|^p representable
    let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = x.iter().map(|z| (z.norm() / scale).powf(p)).sum();
    scale * sum.powf(1.0 / p)
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
}

fn norm2(x: &[Complex64]) -> f64 {
    vector_pnorm(x, 2.0)
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// diagonal `alpha` and off-diagonal `beta`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for k in 0..alpha.len() {
        let b2 = if k == 0 { 0.0 } else { beta[k - 1] * beta[k - 1] };
        d = alpha[k] - x - b2 / d;
        if d == 0.0 {
            d = -f64::EPSILON * (alpha[k].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of a symmetric tridiagonal matrix, by bisection.
pub fn tridiagonal_max_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    let radius = |k: usize| {
        let left = if k > 0 { beta[k - 1].abs() } else { 0.0 };
        let right = if k + 1 < n { beta[k].abs() } else { 0.0 };
        left + right
    };
    let mut lo = (0..n).map(|k| alpha[k] - radius(k)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..n).map(|k| alpha[k] + radius(k)).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Unit eigenvector for the largest eigenvalue `theta` of a symmetric
/// tridiagonal matrix. Inverse iteration with a shift just above `theta`,
/// where `T - shift` is negative definite and the LDL solve needs no pivoting.
fn tridiagonal_top_vector(alpha: &[f64], beta: &[f64], theta: f64) -> Vec<f64> {
    let n = alpha.len();
    let scale = alpha.iter().chain(beta).fold(theta.abs(), |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let shift = theta + 1e-10 * scale;
    let mut d = vec![0.0; n];
    for k in 0..n {
        let b2 = if k == 0 { 0.0 } else { beta[k - 1] * beta[k - 1] / d[k - 1] };
        d[k] = alpha[k] - shift - b2;
    }
    let mut y = vec![1.0; n];
    for _ in 0..3 {
        // forward: L z = y with L unit lower bidiagonal, l_k = beta_k / d_k
        for k in 1..n {
            y[k] -= beta[k - 1] / d[k - 1] * y[k - 1];
        }
        // backward: D L^T x = z
        y[n - 1] /= d[n - 1];
        for k in (0..n - 1).rev() {
            y[k] = y[k] / d[k] - beta[k] / d[k] * y[k + 1];
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut y {
            *v /= norm;
        }
    }
    y
}

/// Approximate top right singular vector of `a` by restarted Lanczos on
/// `A^H A` with full reorthogonalisation, starting from `start`.
pub fn lanczos_top_singular_vector(
    a: &ComplexMatrix,
    start: &[Complex64],
    max_dim: usize,
    restarts: usize,
) -> Vec<Complex64> {
    let n = a.cols();
    let mut x = start.to_vec();
    let mut theta_prev = f64::NEG_INFINITY;
    for _ in 0..restarts.max(1) {
        let nx = norm2(&x);
        if nx == 0.0 {
            return x;
        }
        let mut basis: Vec<Vec<Complex64>> = vec![x.iter().map(|v| v / nx).collect()];
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        for j in 0..max_dim.min(n).max(1) {
            let mut w = a.adjoint_matvec(&a.matvec(&basis[j]));
            alpha.push(dot(&basis[j], &w).re);
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi -= c * vi;
                    }
                }
            }
            let b = norm2(&w);
            if j + 1 == max_dim.min(n) || b <= 1e-14 * alpha[j].abs().max(f64::MIN_POSITIVE) {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|v| v / b).collect());
        }
        beta.truncate(alpha.len().saturating_sub(1));
        let theta = tridiagonal_max_eigenvalue(&alpha, &beta);
        let y = tridiagonal_top_vector(&alpha, &beta, theta);
        x = vec![Complex64::new(0.0, 0.0); n];
        for (yk, v) in y.iter().zip(&basis) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += vi * *yk;
            }
        }
        if basis.len() == n || (theta - theta_prev).abs() <= 1e-15 * theta.abs() {
            break;
        }
        theta_prev = theta;
    }
    x
}
