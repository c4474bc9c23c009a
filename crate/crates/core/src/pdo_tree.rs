//! Pseudo-differential operators on the tree.
//!
//! The kernel of `T_Psi` is
//! `K(x, y) = c_G int_T Psi(x, s) phi_s(d(x, y)) |c(s)|^{-2} ds`, a function of
//! the row vertex and the distance only. [`kernel_direct`] integrates it on the
//! real torus; [`kernel_shifted`] integrates the equivalent one-sided form on
//! the horizontal line `Im s = delta_p`, which is valid for Weyl-invariant
//! symbols holomorphic on the strip.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::spectral::{c_reciprocal, delta_p, plancherel_density, qpow, spherical_function, TorusGrid};
use crate::symbols::{MultiplierSymbol, TreeSymbol};
use crate::transforms::{spherical_transform, FiniteFunction};
use crate::tree::{ball, distance, height_on_zero_ray, TreeParams, Vertex};

/// Which half of the height split `T_Psi = T+ + T-` to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitSign {
    /// Pairs with `h(x) - h(y) >= 0`.
    Plus,
    /// Pairs with `h(x) - h(y) <= -1`.
    Minus,
}

impl SplitSign {
    fn admits(self, height_gap: i64) -> bool {
        match self {
            SplitSign::Plus => height_gap >= 0,
            SplitSign::Minus => height_gap <= -1,
        }
    }
}

/// `phi_{s_k}(d) |c(s_k)|^{-2}` for every node, for `d` in `0..=max_dist`.
#[derive(Debug, Clone)]
struct SpectralTable {
    // rows[d][k]
    rows: Vec<Vec<f64>>,
}

impl SpectralTable {
    fn new(max_dist: usize, grid: &TorusGrid, params: &TreeParams) -> Self {
        let rows = (0..=max_dist)
            .map(|d| {
                grid.nodes()
                    .iter()
                    .map(|&s| {
                        // phi_s(d) is real for real s
                        spherical_function(Complex64::new(s, 0.0), d, params).re
                            * plancherel_density(s, params)
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }
}

fn symbol_row<S: TreeSymbol + ?Sized>(sym: &S, x: &Vertex, grid: &TorusGrid) -> Result<Vec<Complex64>> {
    grid.nodes()
        .iter()
        .map(|&s| sym.eval(x, Complex64::new(s, 0.0)))
        .collect()
}

fn kernel_from_row(row: &[Complex64], weights: &[f64], grid: &TorusGrid, params: &TreeParams) -> Complex64 {
    let sum = row
        .iter()
        .zip(weights)
        .fold(Complex64::new(0.0, 0.0), |acc, (&psi, &w)| acc + psi * w);
    sum * grid.weight() * params.c_g()
}

/// `K(x, y)` for any `y` with `d(x, y) = dist`, integrated on the real torus.
pub fn kernel_direct<S: TreeSymbol + ?Sized>(
    sym: &S,
    x: &Vertex,
    dist: usize,
    grid: &TorusGrid,
    params: &TreeParams,
) -> Result<Complex64> {
    let row = symbol_row(sym, x, grid)?;
    let weights: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&s| spherical_function(Complex64::new(s, 0.0), dist, params).re * plancherel_density(s, params))
        .collect();
    Ok(kernel_from_row(&row, &weights, grid, params))
}

/// `K(x, y)` from the contour-shifted form
/// `2 c_G q^{-(delta + 1/2) d} int_T Psi(x, s + i delta) q^{i s d} / c(-s - i delta) ds`
/// with `delta = delta_p`. For `p <= 2` the prefactor is `q^{-d/p}`.
pub fn kernel_shifted<S: TreeSymbol + ?Sized>(
    sym: &S,
    x: &Vertex,
    dist: usize,
    p: f64,
    grid: &TorusGrid,
    params: &TreeParams,
) -> Result<Complex64> {
    let delta = checked_shift(sym, p)?;
    let d = dist as f64;
    let sum = grid.nodes().iter().try_fold(Complex64::new(0.0, 0.0), |acc, &s| {
        let z = Complex64::new(s, delta);
        let psi = sym.eval(x, z)?;
        let wave = qpow(Complex64::new(0.0, s * d), params);
        Ok::<_, Error>(acc + psi * wave * c_reciprocal(-z, params))
    })?;
    let decay = params.qf().powf(-(delta + 0.5) * d);
    Ok(sum * grid.weight() * (2.0 * params.c_g() * decay))
}

/// Validates `p` and the symbol's strip, returning `delta_p`.
pub fn checked_shift<S: TreeSymbol + ?Sized>(sym: &S, p: f64) -> Result<f64> {
    if !(p > 1.0) || p.is_infinite() || p.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "p = {p} must lie in (1, inf)"
        )));
    }
    let delta = delta_p(p);
    let halfwidth = sym.strip_halfwidth();
    // the shifted line must lie inside the open strip unless it is the real axis
    if delta > 0.0 && halfwidth <= delta {
        return Err(Error::StripTooNarrow {
            symbol: sym.id(),
            halfwidth,
            p,
            required: delta,
        });
    }
    Ok(delta)
}

/// Dense kernel of `T_Psi` restricted to a ball.
#[derive(Debug, Clone)]
pub struct KernelSection {
    pub q: u32,
    pub radius: usize,
    pub n_nodes: usize,
    pub symbol_id: String,
    pub p: Option<f64>,
    ball: Vec<Vertex>,
    distances: Vec<usize>,
    entries: ComplexMatrix,
}

impl KernelSection {
    pub fn ball(&self) -> &[Vertex] {
        &self.ball
    }

    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    pub fn distance(&self, i: usize, j: usize) -> usize {
        self.distances[i * self.ball.len() + j]
    }

    pub fn len(&self) -> usize {
        self.ball.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ball.is_empty()
    }

    /// Largest spread of entries over pairs at equal distance.
    pub fn radial_spread(&self) -> f64 {
        let n = self.ball.len();
        let mut first: Vec<Option<Complex64>> = vec![None; 2 * self.radius + 1];
        let mut spread: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = self.distance(i, j);
                let v = self.entries.get(i, j);
                match first[d] {
                    None => first[d] = Some(v),
                    Some(f) => spread = spread.max((f - v).norm()),
                }
            }
        }
        spread
    }

    /// The section restricted to the sub-ball of radius `r <= radius`.
    pub fn restrict(&self, r: usize) -> KernelSection {
        let idx: Vec<usize> = (0..self.ball.len())
            .filter(|&i| self.ball[i].depth() <= r)
            .collect();
        let n = idx.len();
        let mut distances = Vec::with_capacity(n * n);
        for &i in &idx {
            for &j in &idx {
                distances.push(self.distance(i, j));
            }
        }
        KernelSection {
            q: self.q,
            radius: r.min(self.radius),
            n_nodes: self.n_nodes,
            symbol_id: self.symbol_id.clone(),
            p: self.p,
            ball: idx.iter().map(|&i| self.ball[i].clone()).collect(),
            distances,
            entries: self.entries.principal_submatrix(&idx),
        }
    }
}

/// Assemble `K(x, y)` for all pairs in the ball of radius `radius`.
///
/// Rows are computed in parallel; each entry is a fixed-order sum over the
/// grid, so the result does not depend on the thread count.
pub fn assemble_section<S: TreeSymbol + ?Sized>(
    sym: &S,
    radius: usize,
    grid: &TorusGrid,
    params: &TreeParams,
) -> Result<KernelSection> {
    let vertices = ball(radius, params);
    let n = vertices.len();
    let table = SpectralTable::new(2 * radius, grid, params);
    let distances: Vec<usize> = vertices
        .iter()
        .flat_map(|x| vertices.iter().map(move |y| distance(x, y)))
        .collect();
    let rows: Vec<Vec<Complex64>> = vertices
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let psi = symbol_row(sym, x, grid)?;
            let by_dist: Vec<Complex64> = table
                .rows
                .iter()
                .map(|w| kernel_from_row(&psi, w, grid, params))
                .collect();
            Ok((0..n).map(|j| by_dist[distances[i * n + j]]).collect())
        })
        .collect::<Result<_>>()?;
    let entries = ComplexMatrix::from_row_major(n, n, rows.into_iter().flatten().collect())?;
    Ok(KernelSection {
        q: params.q(),
        radius,
        n_nodes: grid.len(),
        symbol_id: sym.id(),
        p: None,
        ball: vertices,
        distances,
        entries,
    })
}

fn check_support(section: &KernelSection, f: &FiniteFunction) -> Result<()> {
    if f.radius() != section.radius || f.params().q() != section.q {
        return Err(Error::InvalidInput(format!(
            "function on ball of radius {} does not match section radius {}",
            f.radius(),
            section.radius
        )));
    }
    Ok(())
}

/// `(T_Psi f)(x) = sum_y K(x, y) f(y)` on the ball carrying `f`.
pub fn apply_pdo<S: TreeSymbol + ?Sized>(
    sym: &S,
    f: &FiniteFunction,
    grid: &TorusGrid,
) -> Result<FiniteFunction> {
    let section = assemble_section(sym, f.radius(), grid, f.params())?;
    apply_section(&section, f)
}

pub fn apply_section(section: &KernelSection, f: &FiniteFunction) -> Result<FiniteFunction> {
    check_support(section, f)?;
    let values = section.entries.matvec(f.values());
    FiniteFunction::from_values(f.radius(), f.params(), values)
}

/// One half of the split `T_Psi = T+ + T-`, with heights taken along the
/// all-zeros ray.
pub fn apply_split<S: TreeSymbol + ?Sized>(
    sym: &S,
    f: &FiniteFunction,
    sign: SplitSign,
    grid: &TorusGrid,
) -> Result<FiniteFunction> {
    let section = assemble_section(sym, f.radius(), grid, f.params())?;
    apply_split_section(&section, f, sign)
}

pub fn apply_split_section(
    section: &KernelSection,
    f: &FiniteFunction,
    sign: SplitSign,
) -> Result<FiniteFunction> {
    check_support(section, f)?;
    let heights: Vec<i64> = section.ball.iter().map(height_on_zero_ray).collect();
    let values = (0..section.len())
        .map(|i| {
            section
                .entries
                .row(i)
                .iter()
                .zip(f.values())
                .zip(&heights)
                .filter(|(_, &hy)| sign.admits(heights[i] - hy))
                .fold(Complex64::new(0.0, 0.0), |acc, ((k, v), _)| acc + k * v)
        })
        .collect();
    FiniteFunction::from_values(f.radius(), f.params(), values)
}

/// Radial multiplier on a radial function on a ball.
pub fn apply_multiplier<M: MultiplierSymbol + ?Sized>(
    m: &M,
    f: &FiniteFunction,
    grid: &TorusGrid,
) -> Result<FiniteFunction> {
    let profile = f
        .radial_profile(RADIAL_TOLERANCE)
        .ok_or_else(|| Error::InvalidInput("multiplier fast path needs a radial input".into()))?;
    let out = apply_multiplier_profile(m, &profile, grid, f.params())?;
    FiniteFunction::radial(&out, f.params())
}

/// Spread on a sphere below which a function counts as radial.
pub const RADIAL_TOLERANCE: f64 = 1e-12;

/// Radial multiplier on a radial input given by its profile: the inverse
/// spherical transform of `m(s) f^(s)` evaluated at distances `0..=radius`.
pub fn apply_multiplier_profile<M: MultiplierSymbol + ?Sized>(
    m: &M,
    profile: &[Complex64],
    grid: &TorusGrid,
    params: &TreeParams,
) -> Result<Vec<Complex64>> {
    let radius = profile.len().saturating_sub(1);
    let spectrum: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|&s| {
            let z = Complex64::new(s, 0.0);
            Ok(m.eval(z)? * spherical_transform(profile, z, params) * plancherel_density(s, params))
        })
        .collect::<Result<_>>()?;
    Ok((0..=radius)
        .map(|d| {
            let sum = grid
                .nodes()
                .iter()
                .zip(&spectrum)
                .fold(Complex64::new(0.0, 0.0), |acc, (&s, &v)| {
                    acc + v * spherical_function(Complex64::new(s, 0.0), d, params)
                });
            sum * grid.weight() * params.c_g()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{
        pole_multiplier, product_symbol, trig_multiplier, VertexFactor,
    };
    use crate::tree::make_vertex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn setup(q: u32, n: usize) -> (TreeParams, TorusGrid) {
        let p = TreeParams::new(q).unwrap();
        let g = TorusGrid::new(n, &p).unwrap();
        (p, g)
    }

    // Independent path: phi from the boundary-cylinder integral, Plancherel
    // density from 1 / (c(s) c(-s)), left-endpoint trapezoid shifted by a
    // quarter cell (never hits the pole set for the sizes used here).
    fn kernel_oracle(m: &dyn Fn(f64) -> Complex64, dist: usize, n: usize, params: &TreeParams) -> Complex64 {
        use crate::spectral::c_function;
        use crate::tree::{boundary_cylinders, poisson_power};
        let tau = params.tau();
        let h = tau / n as f64;
        let x = crate::tree::geodesic_vertex(dist as i64);
        let cyl = boundary_cylinders(dist.max(1), params).unwrap();
        let mut total = c(0.0, 0.0);
        for k in 0..n {
            let s = -tau / 2.0 + (k as f64 + 0.25) * h;
            let exponent = c(0.5, s);
            let phi: Complex64 = cyl
                .iter()
                .map(|w| poisson_power(&x, w, exponent, params).unwrap() * w.nu_mass())
                .sum();
            let dens = 1.0 / (c_function(c(s, 0.0), params).unwrap() * c_function(c(-s, 0.0), params).unwrap());
            total += m(s) * phi * dens;
        }
        total * h * params.c_g()
    }

    #[test]
    fn identity_kernel() {
        let (p, g) = setup(2, 512);
        let one = trig_multiplier(&[1.0], &p);
        let o = Vertex::root();
        assert!((kernel_direct(&one, &o, 0, &g, &p).unwrap() - 1.0).norm() < 1e-10);
        let x = make_vertex(&[2, 1], &p).unwrap();
        assert!(kernel_direct(&one, &x, 3, &g, &p).unwrap().norm() < 1e-10);
    }

    #[test]
    fn trig_kernel_matches_independent_quadrature() {
        let (p, g) = setup(2, 512);
        let m = trig_multiplier(&[0.0, 1.0], &p);
        let log_q = p.log_q();
        for d in 0..=6 {
            let direct = kernel_direct(&m, &Vertex::root(), d, &g, &p).unwrap();
            let oracle = kernel_oracle(&|s| c((s * log_q).cos(), 0.0), d, 600, &p);
            assert!((direct - oracle).norm() < 1e-11, "d={d} {direct} {oracle}");
        }
    }

    #[test]
    fn shifted_kernel_matches_direct() {
        let (p, g) = setup(2, 512);
        let one = trig_multiplier(&[1.0], &p);
        for d in 0..=6 {
            let a = kernel_direct(&one, &Vertex::root(), d, &g, &p).unwrap();
            let b = kernel_shifted(&one, &Vertex::root(), d, 1.5, &g, &p).unwrap();
            assert!((a - b).norm() < 1e-9, "d={d}");
        }
        let psi = product_symbol(
            VertexFactor::parity(),
            Arc::new(trig_multiplier(&[0.5, 0.3, -0.2], &p)),
        );
        let x = make_vertex(&[0, 1, 1], &p).unwrap();
        let a = kernel_direct(&psi, &x, 4, &g, &p).unwrap();
        let b = kernel_shifted(&psi, &x, 4, 1.2, &g, &p).unwrap();
        assert!((a - b).norm() < 1e-9);
        // p = 2 degenerates to the direct kernel
        let b = kernel_shifted(&psi, &x, 4, 2.0, &g, &p).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn shifted_kernel_rejects_narrow_strips() {
        let (p, g) = setup(2, 64);
        let narrow = crate::symbols::pole_multiplier_with_halfwidth(0.05, &p).unwrap();
        let err = kernel_shifted(&narrow, &Vertex::root(), 1, 1.2, &g, &p).unwrap_err();
        assert!(matches!(err, Error::StripTooNarrow { .. }));
        let one = trig_multiplier(&[1.0], &p);
        for bad in [1.0, 0.5, f64::INFINITY, f64::NAN] {
            assert!(kernel_shifted(&one, &Vertex::root(), 1, bad, &g, &p).is_err());
        }
    }

    #[test]
    fn identity_section() {
        for q in [2, 3] {
            let (p, g) = setup(q, 512);
            let one = trig_multiplier(&[1.0], &p);
            let sec = assemble_section(&one, 2, &g, &p).unwrap();
            assert_eq!(sec.len(), p.ball_size(2));
            let err = sec.entries().max_abs_diff(&ComplexMatrix::identity(sec.len()));
            assert!(err < 1e-9, "q={q} err={err}");
        }
    }

    #[test]
    fn radius_zero_section_is_the_plancherel_average() {
        let (p, g) = setup(2, 512);
        let m = trig_multiplier(&[0.4, 0.6], &p);
        let sec = assemble_section(&m, 0, &g, &p).unwrap();
        assert_eq!(sec.len(), 1);
        let avg = kernel_direct(&m, &Vertex::root(), 0, &g, &p).unwrap();
        assert_eq!(sec.entries().get(0, 0), avg);
        // cos(s log q) averages to phi_s(0) weighted: c_G int cos |c|^-2 ds
        assert!((avg.im).abs() < 1e-15);
    }

    #[test]
    fn multiplier_sections_are_radial() {
        let (p, g) = setup(2, 512);
        let m = pole_multiplier(1.4, &p).unwrap();
        let sec = assemble_section(&m, 3, &g, &p).unwrap();
        assert!(sec.radial_spread() < 1e-12);
        let psi = product_symbol(VertexFactor::parity(), Arc::new(m));
        let sec = assemble_section(&psi, 3, &g, &p).unwrap();
        assert!(sec.radial_spread() > 1e-3);
    }

    #[test]
    fn section_assembly_matches_pointwise_kernel() {
        let (p, g) = setup(3, 128);
        let psi = product_symbol(VertexFactor::decay(), Arc::new(trig_multiplier(&[0.1, 0.9], &p)));
        let sec = assemble_section(&psi, 2, &g, &p).unwrap();
        for i in (0..sec.len()).step_by(3) {
            for j in (0..sec.len()).step_by(2) {
                let x = &sec.ball()[i];
                let k = kernel_direct(&psi, x, distance(x, &sec.ball()[j]), &g, &p).unwrap();
                assert_eq!(k, sec.entries().get(i, j));
            }
        }
    }

    #[test]
    fn apply_identity_and_linearity() {
        let (p, g) = setup(2, 512);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut rand_fn = || FiniteFunction::from_fn(2, &p, |_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let f = rand_fn();
        let h = rand_fn();
        let one = trig_multiplier(&[1.0], &p);
        assert!(apply_pdo(&one, &f, &g).unwrap().max_abs_diff(&f) < 1e-9);

        let psi = product_symbol(VertexFactor::parity(), Arc::new(trig_multiplier(&[0.2, 1.0], &p)));
        let (a, b) = (c(0.5, -0.3), c(-1.1, 2.0));
        let lhs = apply_pdo(&psi, &f.combine(a, &h, b).unwrap(), &g).unwrap();
        let rhs = apply_pdo(&psi, &f, &g)
            .unwrap()
            .combine(a, &apply_pdo(&psi, &h, &g).unwrap(), b)
            .unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn apply_matches_multiplier_path() {
        let (p, g) = setup(2, 512);
        let m = trig_multiplier(&[0.0, 1.0], &p);
        let delta = FiniteFunction::delta(&Vertex::root(), 3, &p).unwrap();
        let tree_out = apply_pdo(&m, &delta, &g).unwrap();
        let profile = tree_out.radial_profile(1e-12).expect("radial output");
        let spherical = apply_multiplier_profile(&m, &[c(1.0, 0.0)], &g, &p).unwrap();
        assert!((profile[0] - spherical[0]).norm() < 1e-10);

        let mut spherical3 = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        spherical3 = apply_multiplier_profile(&m, &spherical3, &g, &p).unwrap();
        for d in 0..=3 {
            assert!((profile[d] - spherical3[d]).norm() < 1e-10, "d={d}");
        }

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let prof: Vec<Complex64> = (0..4).map(|_| c(rng.gen(), rng.gen())).collect();
        let f = FiniteFunction::radial(&prof, &p).unwrap();
        let pole = pole_multiplier(1.8, &p).unwrap();
        let via_tree = apply_pdo(&pole, &f, &g).unwrap();
        let via_profile = apply_multiplier_profile(&pole, &prof, &g, &p).unwrap();
        let via_function = apply_multiplier(&pole, &f, &g).unwrap();
        assert!(via_function.max_abs_diff(&via_tree) < 1e-10);
        assert!(via_function.radial_profile(1e-12).is_some());
        let tree_profile = via_tree.radial_profile(1e-12).expect("radial output");
        for d in 0..=3 {
            assert!((tree_profile[d] - via_profile[d]).norm() < 1e-10);
        }
        let same = apply_multiplier_profile(&trig_multiplier(&[1.0], &p), &prof, &g, &p).unwrap();
        for d in 0..=3 {
            assert!((same[d] - prof[d]).norm() < 1e-9);
        }
    }

    #[test]
    fn multiplier_fast_path_rejects_non_radial_input() {
        let (p, g) = setup(2, 64);
        let x = make_vertex(&[1], &p).unwrap();
        let f = FiniteFunction::delta(&x, 2, &p).unwrap();
        let m = trig_multiplier(&[1.0], &p);
        assert!(matches!(apply_multiplier(&m, &f, &g), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn split_partitions_the_operator() {
        let (p, g) = setup(2, 256);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let psi = product_symbol(VertexFactor::parity(), Arc::new(trig_multiplier(&[0.3, 0.8, 0.1], &p)));
        let f = FiniteFunction::from_fn(3, &p, |_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let full = apply_pdo(&psi, &f, &g).unwrap();
        let plus = apply_split(&psi, &f, SplitSign::Plus, &g).unwrap();
        let minus = apply_split(&psi, &f, SplitSign::Minus, &g).unwrap();
        let sum = plus.combine(c(1.0, 0.0), &minus, c(1.0, 0.0)).unwrap();
        assert!(sum.max_abs_diff(&full) < 1e-13);
    }

    #[test]
    fn split_indicator_logic() {
        let (p, g) = setup(2, 512);
        let one = trig_multiplier(&[1.0], &p);
        let delta = FiniteFunction::delta(&Vertex::root(), 2, &p).unwrap();
        let sec = assemble_section(&one, 2, &g, &p).unwrap();
        let plus = apply_split_section(&sec, &delta, SplitSign::Plus).unwrap();
        let minus = apply_split_section(&sec, &delta, SplitSign::Minus).unwrap();
        let o = Vertex::root();
        // diagonal term lives in T+
        assert_eq!(plus.value(&o), sec.entries().get(0, 0));
        assert_eq!(minus.value(&o), c(0.0, 0.0));
        // h([1]) = -1 so the y = o term goes to T-
        let x = make_vertex(&[1], &p).unwrap();
        assert_eq!(height_on_zero_ray(&x), -1);
        let i = sec.ball().iter().position(|v| *v == x).unwrap();
        assert_eq!(plus.value(&x), c(0.0, 0.0));
        assert_eq!(minus.value(&x), sec.entries().get(i, 0));
        // h([0]) = 1: y = o goes to T+
        let y = make_vertex(&[0], &p).unwrap();
        assert_eq!(minus.value(&y), c(0.0, 0.0));
    }

    #[test]
    fn grid_doubling_stability() {
        let p = TreeParams::new(2).unwrap();
        let g1 = TorusGrid::new(512, &p).unwrap();
        let g2 = TorusGrid::new(1024, &p).unwrap();
        let syms: Vec<Box<dyn TreeSymbol>> = vec![
            Box::new(trig_multiplier(&[0.5, 0.2, 0.1], &p)),
            Box::new(pole_multiplier(1.2, &p).unwrap()),
            Box::new(product_symbol(VertexFactor::decay(), Arc::new(trig_multiplier(&[0.0, 1.0], &p)))),
        ];
        for sym in syms {
            for d in 0..=6 {
                let x = make_vertex(&[0, 1], &p).unwrap();
                let a = kernel_direct(sym.as_ref(), &x, d, &g1, &p).unwrap();
                let b = kernel_direct(sym.as_ref(), &x, d, &g2, &p).unwrap();
                assert!((a - b).norm() < 1e-11, "{} d={d}", sym.id());
            }
        }
    }

    #[test]
    fn kernel_decay_witness() {
        let (p, g) = setup(2, 512);
        let psi = product_symbol(VertexFactor::parity(), Arc::new(trig_multiplier(&[0.2, 0.5, 0.3], &p)));
        let x = Vertex::root();
        let bound = (0..=12)
            .map(|d| kernel_direct(&psi, &x, d, &g, &p).unwrap().norm() * 2f64.powf(d as f64 / 2.0))
            .fold(0.0, f64::max);
        assert!(bound < 10.0, "{bound}");
    }

    #[test]
    fn restrict_gives_nested_sections() {
        let (p, g) = setup(2, 128);
        let m = trig_multiplier(&[0.3, 0.7], &p);
        let big = assemble_section(&m, 3, &g, &p).unwrap();
        let small = assemble_section(&m, 2, &g, &p).unwrap();
        let cut = big.restrict(2);
        assert_eq!(cut.ball(), small.ball());
        assert_eq!(cut.entries(), small.entries());
    }
}
