//! Pseudo-differential operators on the lattice `Z`.
//!
//! `T_psi f(l) = (1/tau) int_T psi(l, s) F f(s) q^{i l s} ds = sum_d f(d) kappa(l, l - d)`
//! with `kappa(l, k) = (1/tau) int_T psi(l, s) q^{i s k} ds`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::norm_lab::{pnorm_lower_bound, NormEstimate};
use crate::spectral::{qpow, TorusGrid};
use crate::symbols::ZSymbol;
use crate::transforms::{z_fourier, ZFunction};
use crate::tree::TreeParams;

/// Smallest admissible node count for which the quadrature of `kappa` is
/// exact on a symbol of the given bandwidth.
pub fn exact_node_count(bandwidth: usize) -> usize {
    let n = 4 * (bandwidth + 1);
    n.max(4)
}

/// Grid for a lattice symbol: exact when the symbol declares a bandwidth,
/// `fallback` nodes otherwise.
pub fn grid_for_symbol<S: ZSymbol + ?Sized>(sym: &S, fallback: usize, params: &TreeParams) -> Result<TorusGrid> {
    let n = match sym.bandwidth() {
        Some(b) => exact_node_count(b),
        None => fallback,
    };
    TorusGrid::new(n, params)
}

fn symbol_column<S: ZSymbol + ?Sized>(sym: &S, l: i64, grid: &TorusGrid) -> Result<Vec<Complex64>> {
    grid.nodes()
        .iter()
        .map(|&s| sym.eval(l, Complex64::new(s, 0.0)))
        .collect()
}

fn kappa_from_column(psi: &[Complex64], k: i64, grid: &TorusGrid, params: &TreeParams) -> Complex64 {
    let sum = grid
        .nodes()
        .iter()
        .zip(psi)
        .fold(Complex64::new(0.0, 0.0), |acc, (&s, &v)| {
            acc + v * qpow(Complex64::new(0.0, s * k as f64), params)
        });
    sum * grid.weight() / grid.tau()
}

/// `kappa(l, k)` by the grid quadrature.
pub fn z_kernel<S: ZSymbol + ?Sized>(
    sym: &S,
    l: i64,
    k: i64,
    grid: &TorusGrid,
    params: &TreeParams,
) -> Result<Complex64> {
    let psi = symbol_column(sym, l, grid)?;
    Ok(kappa_from_column(&psi, k, grid, params))
}

/// Kernel values `kappa(l, k)` for `l` in a window and `|k|` bounded.
#[derive(Debug, Clone)]
pub struct ZKernel {
    l_min: i64,
    k_max: i64,
    n_nodes: usize,
    // rows[l - l_min][k + k_max]
    rows: Vec<Vec<Complex64>>,
}

impl ZKernel {
    pub fn new<S: ZSymbol + ?Sized>(
        sym: &S,
        l_range: (i64, i64),
        k_max: i64,
        grid: &TorusGrid,
        params: &TreeParams,
    ) -> Result<Self> {
        let (l_min, l_max) = l_range;
        if l_max < l_min || k_max < 0 {
            return Err(Error::InvalidParameter(format!(
                "empty kernel window l in [{l_min}, {l_max}], |k| <= {k_max}"
            )));
        }
        let rows = (l_min..=l_max)
            .into_par_iter()
            .map(|l| {
                let psi = symbol_column(sym, l, grid)?;
                Ok((-k_max..=k_max)
                    .map(|k| kappa_from_column(&psi, k, grid, params))
                    .collect())
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            l_min,
            k_max,
            n_nodes: grid.len(),
            rows,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// `kappa(l, k)`, or `None` outside the tabulated window.
    pub fn get(&self, l: i64, k: i64) -> Option<Complex64> {
        let i = l - self.l_min;
        if i < 0 || i >= self.rows.len() as i64 || k.abs() > self.k_max {
            return None;
        }
        Some(self.rows[i as usize][(k + self.k_max) as usize])
    }
}

/// `T_psi f` on `[window.0, window.1]` through the kernel sum.
pub fn apply_zpdo<S: ZSymbol + ?Sized>(
    sym: &S,
    f: &ZFunction,
    window: (i64, i64),
    grid: &TorusGrid,
    params: &TreeParams,
) -> Result<ZFunction> {
    let (lo, hi) = window;
    let k_max = (hi - f.l_min()).abs().max((lo - f.l_max()).abs());
    let kernel = ZKernel::new(sym, window, k_max, grid, params)?;
    Ok(ZFunction::from_fn(lo, hi, |l| {
        f.iter().fold(Complex64::new(0.0, 0.0), |acc, (d, v)| {
            acc + v * kernel.get(l, l - d).expect("window covers every offset")
        })
    }))
}

/// `T_psi f` on a window through the spectral form
/// `(1/tau) int_T psi(l, s) F f(s) q^{i l s} ds`.
pub fn apply_zpdo_spectral<S: ZSymbol + ?Sized>(
    sym: &S,
    f: &ZFunction,
    window: (i64, i64),
    grid: &TorusGrid,
    params: &TreeParams,
) -> Result<ZFunction> {
    let (lo, hi) = window;
    let spectrum: Vec<Complex64> = grid.nodes().iter().map(|&s| z_fourier(f, s, params)).collect();
    let values = (lo..=hi)
        .map(|l| {
            let psi = symbol_column(sym, l, grid)?;
            let sum = grid
                .nodes()
                .iter()
                .zip(psi.iter().zip(&spectrum))
                .fold(Complex64::new(0.0, 0.0), |acc, (&s, (&a, &b))| {
                    acc + a * b * qpow(Complex64::new(0.0, l as f64 * s), params)
                });
            Ok(sum * grid.weight() / grid.tau())
        })
        .collect::<Result<_>>()?;
    Ok(ZFunction::new(lo, values))
}

/// The matrix `M(l, d) = kappa(l, l - d)` for `l, d` in `[-L, L]`.
///
/// Offsets `l - d` reach `2L`, so a symbol of bandwidth `b` is resolved
/// without aliasing only when the grid has more than `2L + b` nodes.
#[derive(Debug, Clone)]
pub struct ZSection {
    pub q: u32,
    pub half_width: usize,
    pub n_nodes: usize,
    pub symbol_id: String,
    matrix: ComplexMatrix,
}

impl ZSection {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.rows() == 0
    }

    /// Lattice point of row/column `i`.
    pub fn point(&self, i: usize) -> i64 {
        i as i64 - self.half_width as i64
    }

    /// Largest spread of entries along any diagonal `l - d = const`.
    pub fn toeplitz_spread(&self) -> f64 {
        let n = self.len();
        let mut spread: f64 = 0.0;
        for i in 1..n {
            for j in 1..n {
                spread = spread.max((self.matrix.get(i, j) - self.matrix.get(i - 1, j - 1)).norm());
            }
        }
        spread
    }

    /// The section on the centred sub-window `[-l, l]`.
    pub fn restrict(&self, l: usize) -> ZSection {
        let l = l.min(self.half_width);
        let off = self.half_width - l;
        let idx: Vec<usize> = (off..off + 2 * l + 1).collect();
        ZSection {
            q: self.q,
            half_width: l,
            n_nodes: self.n_nodes,
            symbol_id: self.symbol_id.clone(),
            matrix: self.matrix.principal_submatrix(&idx),
        }
    }
}

pub fn finite_section<S: ZSymbol + ?Sized>(
    sym: &S,
    half_width: usize,
    grid: &TorusGrid,
    params: &TreeParams,
) -> Result<ZSection> {
    let l = half_width as i64;
    let kernel = ZKernel::new(sym, (-l, l), 2 * l, grid, params)?;
    let matrix = ComplexMatrix::from_fn(2 * half_width + 1, 2 * half_width + 1, |i, j| {
        let (row, col) = (i as i64 - l, j as i64 - l);
        kernel.get(row, row - col).expect("section offsets are tabulated")
    });
    Ok(ZSection {
        q: params.q(),
        half_width,
        n_nodes: grid.len(),
        symbol_id: sym.id(),
        matrix,
    })
}

/// Finite-section norm against the sampled smoothness seminorm.
#[derive(Debug, Clone)]
pub struct CvReport {
    pub norm: NormEstimate,
    /// `sup |d^k psi / ds^k|` over the window, the grid nodes and `k <= 2`.
    pub seminorm: f64,
    pub ratio: f64,
}

pub fn cv_bound_check<S: ZSymbol + ?Sized>(
    sym: &S,
    p: f64,
    half_width: usize,
    grid: &TorusGrid,
    params: &TreeParams,
    max_iters: usize,
    seed: u64,
) -> Result<CvReport> {
    let section = finite_section(sym, half_width, grid, params)?;
    let norm = pnorm_lower_bound(section.matrix(), p, max_iters, seed)?;
    let l = half_width as i64;
    let mut seminorm: f64 = 0.0;
    for row in -l..=l {
        for &s in grid.nodes() {
            for k in 0..=2 {
                let v = sym.derivative(row, Complex64::new(s, 0.0), k)?.norm();
                if !v.is_finite() {
                    return Err(Error::SymbolDomain {
                        symbol: sym.id(),
                        z: s.to_string(),
                    });
                }
                seminorm = seminorm.max(v);
            }
        }
    }
    let ratio = norm.value / seminorm;
    Ok(CvReport { norm, seminorm, ratio })
}
