//! Lower bounds for induced `l^p` norms of finite sections, and the sweeps
//! built on them.
//!
//! The estimator is the `p`-norm power method: with `dual_p(y)` the unit
//! `l^{p'}` vector attaining `<y, dual_p(y)> = ||y||_p`, iterate
//! `x <- dual_{p'}(A^H dual_p(A x))`. Every iterate is a feasible vector, so
//! `||A x||_p / ||x||_p` is a certified lower bound. For `p = 2` the best
//! iterate is refined by restarted Lanczos on `A^H A`.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{lanczos_top_singular_vector, vector_pnorm, ComplexMatrix};
use crate::pdo_tree::{assemble_section, checked_shift, KernelSection};
use crate::pdo_z::finite_section;
use crate::spectral::{conjugate_exponent, TorusGrid};
use crate::symbols::{InducedZSymbol, SymbolSpec, TreeSymbol};
use crate::tree::TreeParams;

pub const DEFAULT_MAX_ITERS: usize = 500;
/// Krylov dimension and restart count of the `p = 2` refinement.
const LANCZOS_DIM: usize = 200;
const LANCZOS_RESTARTS: usize = 8;
pub const STOP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub p: f64,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    /// Vector attaining `value`.
    pub maximizer: Vec<Complex64>,
}

/// `|y|^{p-1} sign(y)`, scaled to unit `l^{p'}` norm.
fn dual_vector(y: &[Complex64], p: f64) -> Vec<Complex64> {
    let scale = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return vec![Complex64::new(0.0, 0.0); y.len()];
    }
    let mut out: Vec<Complex64> = y
        .iter()
        .map(|&z| {
            let r = z.norm();
            if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                z / r * (r / scale).powf(p - 1.0)
            }
        })
        .collect();
    let n = vector_pnorm(&out, conjugate_exponent(p));
    for v in &mut out {
        *v /= n;
    }
    out
}

fn quotient(a: &ComplexMatrix, x: &[Complex64], p: f64) -> f64 {
    let nx = vector_pnorm(x, p);
    if nx == 0.0 {
        return 0.0;
    }
    vector_pnorm(&a.matvec(x), p) / nx
}

struct Run {
    value: f64,
    vector: Vec<Complex64>,
    iterations: usize,
    converged: bool,
}

fn power_method(a: &ComplexMatrix, p: f64, start: Vec<Complex64>, max_iters: usize) -> Run {
    let dual_p = conjugate_exponent(p);
    let mut best = Run {
        value: quotient(a, &start, p),
        vector: start.clone(),
        iterations: 0,
        converged: false,
    };
    let mut x = start;
    let mut prev = best.value;
    for it in 1..=max_iters {
        let y = a.matvec(&x);
        if y.iter().all(|v| v.norm() == 0.0) {
            best.converged = true;
            break;
        }
        let z = a.adjoint_matvec(&dual_vector(&y, p));
        if z.iter().all(|v| v.norm() == 0.0) {
            best.converged = true;
            break;
        }
        x = dual_vector(&z, dual_p);
        let value = quotient(a, &x, p);
        best.iterations = it;
        if value > best.value {
            best.value = value;
            best.vector = x.clone();
        }
        if (value - prev).abs() <= STOP_TOLERANCE * value.max(f64::MIN_POSITIVE) {
            best.converged = true;
            break;
        }
        prev = value;
    }
    best
}

fn check_inputs(a: &ComplexMatrix, p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in (1, inf)")));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Lower bound for `||A||_{p -> p}` from the all-ones start and one seeded
/// random start; the larger result wins.
pub fn pnorm_lower_bound(a: &ComplexMatrix, p: f64, max_iters: usize, seed: u64) -> Result<NormEstimate> {
    pnorm_lower_bound_with_starts(a, p, max_iters, seed, &[])
}

/// As [`pnorm_lower_bound`], with additional starting vectors.
pub fn pnorm_lower_bound_with_starts(
    a: &ComplexMatrix,
    p: f64,
    max_iters: usize,
    seed: u64,
    extra_starts: &[Vec<Complex64>],
) -> Result<NormEstimate> {
    check_inputs(a, p)?;
    let n = a.cols();
    if n == 0 {
        return Ok(NormEstimate {
            p,
            value: 0.0,
            iterations: 0,
            converged: true,
            seed,
            maximizer: Vec::new(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let mut starts = vec![vec![Complex64::new(1.0, 0.0); n], random];
    for s in extra_starts {
        if s.len() != n {
            return Err(Error::InvalidInput(format!(
                "start vector of length {} for a matrix with {n} columns",
                s.len()
            )));
        }
        starts.push(s.clone());
    }
    let mut best: Option<Run> = None;
    let mut iterations = 0;
    let mut converged = true;
    for start in starts {
        let run = power_method(a, p, start, max_iters);
        iterations += run.iterations;
        converged &= run.converged;
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let mut best = best.expect("at least two starts");
    if p == 2.0 {
        // power iteration stalls on nearly degenerate top singular values;
        // a Krylov step from the best iterate closes the gap
        let refined = lanczos_top_singular_vector(a, &best.vector, LANCZOS_DIM, LANCZOS_RESTARTS);
        let value = quotient(a, &refined, p);
        if value > best.value {
            best.value = value;
            best.vector = refined;
        }
    }
    Ok(NormEstimate {
        p,
        value: best.value,
        iterations,
        converged,
        seed,
        maximizer: best.vector,
    })
}

/// Per-cell seed: the `index`-th output of SplitMix64 started at `master`.
pub fn cell_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub q: u32,
    pub p: f64,
    pub radius: usize,
    pub n_nodes: usize,
    pub symbol: String,
    pub norm_lb: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    pub runtime_ms: f64,
}

/// Indices of the sub-ball of radius `r` inside a section of larger radius.
fn sub_ball_indices(section: &KernelSection, r: usize) -> Vec<usize> {
    (0..section.len()).filter(|&i| section.ball()[i].depth() <= r).collect()
}

/// Section norms of `T_Psi` on balls of the given radii, for each `p`.
///
/// Cells are ordered by `(p, R)` as given; cell `i` in that order uses
/// `cell_seed(seed, i)`. The maximizer found at a smaller radius, padded with
/// zeros, seeds the next radius, so `norm_lb` is nondecreasing in `R`.
pub fn norm_growth_sweep(
    spec: &SymbolSpec,
    ps: &[f64],
    radii: &[usize],
    grid: &TorusGrid,
    params: &TreeParams,
    seed: u64,
    max_iters: usize,
) -> Result<Vec<SweepRow>> {
    let mut radii = radii.to_vec();
    radii.sort_unstable();
    radii.dedup();
    let Some(&r_max) = radii.last() else {
        return Ok(Vec::new());
    };
    let sym = spec.build(params)?;
    let started = Instant::now();
    let full = assemble_section(sym.as_ref(), r_max, grid, params)?;
    let assembly_ms = started.elapsed().as_secs_f64() * 1e3;
    let sections: Vec<KernelSection> = radii.iter().map(|&r| full.restrict(r)).collect();
    let symbol = sym.id();

    let per_p: Vec<Vec<SweepRow>> = ps
        .par_iter()
        .enumerate()
        .map(|(pi, &p)| {
            let mut rows = Vec::with_capacity(radii.len());
            let mut previous: Option<(usize, Vec<Complex64>)> = None;
            for (ri, section) in sections.iter().enumerate() {
                let started = Instant::now();
                let cell = cell_seed(seed, (pi * radii.len() + ri) as u64);
                let mut extra = Vec::new();
                if let Some((r_prev, x)) = &previous {
                    let idx = sub_ball_indices(section, *r_prev);
                    let mut padded = vec![Complex64::new(0.0, 0.0); section.len()];
                    for (k, &i) in idx.iter().enumerate() {
                        padded[i] = x[k];
                    }
                    extra.push(padded);
                }
                let est = pnorm_lower_bound_with_starts(section.entries(), p, max_iters, cell, &extra)?;
                rows.push(SweepRow {
                    q: params.q(),
                    p,
                    radius: section.radius,
                    n_nodes: grid.len(),
                    symbol: symbol.clone(),
                    norm_lb: est.value,
                    iterations: est.iterations,
                    converged: est.converged,
                    seed: cell,
                    runtime_ms: started.elapsed().as_secs_f64() * 1e3 + assembly_ms / radii.len() as f64,
                });
                previous = Some((section.radius, est.maximizer));
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_p.into_iter().flatten().collect())
}

#[derive(Debug, Clone)]
pub struct TransferenceReport {
    pub p: f64,
    pub shift: f64,
    pub window: usize,
    pub tree_radius: usize,
    pub symbol: String,
    pub z_norm: NormEstimate,
    pub tree_norm: NormEstimate,
}

/// Norm of the lattice section of `psi(l, s) = Psi(sigma^l o, s - i delta_p)`
/// on `[-window, window]` next to the tree section norm of `T_Psi` on the ball
/// of radius `tree_radius`.
#[allow(clippy::too_many_arguments)]
pub fn transference_probe(
    sym: std::sync::Arc<dyn TreeSymbol>,
    p: f64,
    window: usize,
    tree_radius: usize,
    grid: &TorusGrid,
    params: &TreeParams,
    max_iters: usize,
    seed: u64,
) -> Result<TransferenceReport> {
    let shift = checked_shift(sym.as_ref(), p)?;
    let tree_section = assemble_section(sym.as_ref(), tree_radius, grid, params)?;
    let tree_norm = pnorm_lower_bound(tree_section.entries(), p, max_iters, cell_seed(seed, 0))?;
    let induced = InducedZSymbol::new(sym.clone(), shift);
    let z_section = finite_section(&induced, window, grid, params)?;
    let z_norm = pnorm_lower_bound(z_section.matrix(), p, max_iters, cell_seed(seed, 1))?;
    Ok(TransferenceReport {
        p,
        shift,
        window,
        tree_radius,
        symbol: sym.id(),
        z_norm,
        tree_norm,
    })
}
