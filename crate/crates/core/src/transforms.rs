//! Helgason-Fourier and spherical transforms on the tree, the inversion
//! formula, and the Fourier pair on the lattice `Z`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{plancherel_density, qpow, spherical_function, TorusGrid};
use crate::tree::{ball, boundary_cylinders, height, BoundaryCylinder, TreeParams, Vertex};

/// A complex function on the tree supported in the ball of radius `radius`.
///
/// Values are stored densely in ball order (see [`crate::tree::ball`]).
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteFunction {
    params: TreeParams,
    radius: usize,
    vertices: Vec<Vertex>,
    values: Vec<Complex64>,
}

impl FiniteFunction {
    pub fn zeros(radius: usize, params: &TreeParams) -> Self {
        let vertices = ball(radius, params);
        let values = vec![Complex64::new(0.0, 0.0); vertices.len()];
        Self {
            params: *params,
            radius,
            vertices,
            values,
        }
    }

    pub fn from_fn(
        radius: usize,
        params: &TreeParams,
        mut f: impl FnMut(&Vertex) -> Complex64,
    ) -> Self {
        let mut out = Self::zeros(radius, params);
        for (v, x) in out.values.iter_mut().zip(&out.vertices) {
            *v = f(x);
        }
        out
    }

    pub fn from_values(radius: usize, params: &TreeParams, values: Vec<Complex64>) -> Result<Self> {
        let vertices = ball(radius, params);
        if values.len() != vertices.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} values for a ball of radius {radius}, got {}",
                vertices.len(),
                values.len()
            )));
        }
        Ok(Self {
            params: *params,
            radius,
            vertices,
            values,
        })
    }

    /// Point mass at `x`, supported in the ball of radius `radius >= |x|`.
    pub fn delta(x: &Vertex, radius: usize, params: &TreeParams) -> Result<Self> {
        if x.depth() > radius {
            return Err(Error::InvalidInput(format!(
                "vertex {x} lies outside the ball of radius {radius}"
            )));
        }
        Ok(Self::from_fn(radius, params, |v| {
            Complex64::new(if v == x { 1.0 } else { 0.0 }, 0.0)
        }))
    }

    /// Radial function with `profile[d]` on the sphere of radius `d`.
    pub fn radial(profile: &[Complex64], params: &TreeParams) -> Result<Self> {
        if profile.is_empty() {
            return Err(Error::InvalidInput("empty radial profile".into()));
        }
        Ok(Self::from_fn(profile.len() - 1, params, |v| profile[v.depth()]))
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at `x`; zero outside the support ball.
    pub fn value(&self, x: &Vertex) -> Complex64 {
        match self.vertices.binary_search(x) {
            Ok(i) => self.values[i],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vertex, &Complex64)> {
        self.vertices.iter().zip(&self.values)
    }

    /// The profile by distance if the function is constant on spheres up to `tol`.
    pub fn radial_profile(&self, tol: f64) -> Option<Vec<Complex64>> {
        let mut profile: Vec<Option<Complex64>> = vec![None; self.radius + 1];
        for (x, &v) in self.iter() {
            match profile[x.depth()] {
                None => profile[x.depth()] = Some(v),
                Some(first) if (first - v).norm() > tol => return None,
                Some(_) => {}
            }
        }
        profile.into_iter().collect()
    }

    /// `alpha * self + beta * other` on a common ball.
    pub fn combine(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Result<Self> {
        if self.radius != other.radius || self.params != other.params {
            return Err(Error::InvalidInput(
                "functions live on different balls".into(),
            ));
        }
        let mut out = self.clone();
        for (o, (&a, &b)) in out.values.iter_mut().zip(self.values.iter().zip(&other.values)) {
            *o = alpha * a + beta * b;
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Samples of the Helgason-Fourier transform on a grid of the torus times a
/// family of boundary cylinders.
#[derive(Debug, Clone)]
pub struct HelgasonTable {
    grid: TorusGrid,
    cylinders: Vec<BoundaryCylinder>,
    // entries[k * cylinders.len() + j] = f~(s_k, omega_j)
    entries: Vec<Complex64>,
}

impl HelgasonTable {
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn cylinders(&self) -> &[BoundaryCylinder] {
        &self.cylinders
    }

    pub fn depth(&self) -> usize {
        self.cylinders[0].depth()
    }

    pub fn entry(&self, k: usize, j: usize) -> Complex64 {
        self.entries[k * self.cylinders.len() + j]
    }
}

fn heights(
    vertices: &[Vertex],
    cylinders: &[BoundaryCylinder],
) -> Result<Vec<Vec<i64>>> {
    cylinders
        .iter()
        .map(|c| vertices.iter().map(|x| height(x, c)).collect())
        .collect()
}

/// Powers `q^{(1/2 + i s) h}` for `h` in `-radius..=radius`.
fn plane_wave_powers(s: f64, radius: usize, sign: f64, params: &TreeParams) -> Vec<Complex64> {
    let exponent = Complex64::new(0.5, sign * s);
    let r = radius as i64;
    (-r..=r)
        .map(|h| qpow(exponent * h as f64, params))
        .collect()
}

/// Helgason-Fourier transform `f~(s, omega) = sum_x f(x) q^{(1/2 + i s) h_omega(x)}`
/// sampled at every grid node and every cylinder of depth `depth`.
pub fn helgason_transform(
    f: &FiniteFunction,
    grid: &TorusGrid,
    depth: usize,
) -> Result<HelgasonTable> {
    let params = f.params();
    if depth < f.radius().max(1) {
        return Err(Error::InsufficientDepth {
            depth,
            needed: f.radius().max(1),
        });
    }
    let cylinders = boundary_cylinders(depth, params)?;
    let h = heights(f.vertices(), &cylinders)?;
    let r = f.radius() as i64;
    let rows: Vec<Vec<Complex64>> = grid
        .nodes()
        .par_iter()
        .map(|&s| {
            let powers = plane_wave_powers(s, f.radius(), 1.0, params);
            h.iter()
                .map(|hj| {
                    hj.iter()
                        .zip(f.values())
                        .fold(Complex64::new(0.0, 0.0), |acc, (&hx, &fx)| {
                            acc + fx * powers[(hx + r) as usize]
                        })
                })
                .collect()
        })
        .collect();
    Ok(HelgasonTable {
        grid: grid.clone(),
        cylinders,
        entries: rows.into_iter().flatten().collect(),
    })
}

/// Helgason-Fourier transform at a single complex parameter and cylinder.
pub fn helgason_value(f: &FiniteFunction, z: Complex64, omega: &BoundaryCylinder) -> Result<Complex64> {
    let params = f.params();
    let exponent = Complex64::new(0.5, 0.0) + Complex64::i() * z;
    f.iter().try_fold(Complex64::new(0.0, 0.0), |acc, (x, &fx)| {
        let h = height(x, omega)?;
        Ok(acc + fx * qpow(exponent * h as f64, params))
    })
}

/// Spherical transform of a radial function given by its profile,
/// `sum_d f(d) |S_d| phi_z(d)`.
pub fn spherical_transform(profile: &[Complex64], z: Complex64, params: &TreeParams) -> Complex64 {
    profile
        .iter()
        .enumerate()
        .fold(Complex64::new(0.0, 0.0), |acc, (d, &fd)| {
            acc + fd * params.sphere_size(d) as f64 * spherical_function(z, d, params)
        })
}

/// Inversion formula
/// `f(x) = c_G int_T int_Omega q^{(1/2 - i s) h_omega(x)} f~(s, omega) |c(s)|^{-2} dnu ds`
/// evaluated with the grid and cylinders of the table.
pub fn inverse_helgason(table: &HelgasonTable, x: &Vertex, params: &TreeParams) -> Result<Complex64> {
    if table.depth() < x.depth() {
        return Err(Error::InsufficientDepth {
            depth: table.depth(),
            needed: x.depth(),
        });
    }
    let hx: Vec<i64> = table
        .cylinders
        .iter()
        .map(|c| height(x, c))
        .collect::<Result<_>>()?;
    let r = x.depth();
    let ncyl = table.cylinders.len();
    let mut total = Complex64::new(0.0, 0.0);
    for (k, &s) in table.grid.nodes().iter().enumerate() {
        let powers = plane_wave_powers(s, r, -1.0, params);
        let row = &table.entries[k * ncyl..(k + 1) * ncyl];
        let inner = row
            .iter()
            .zip(&table.cylinders)
            .zip(&hx)
            .fold(Complex64::new(0.0, 0.0), |acc, ((&ft, c), &h)| {
                acc + powers[(h + r as i64) as usize] * ft * c.nu_mass()
            });
        total += inner * plancherel_density(s, params);
    }
    Ok(total * table.grid.weight() * params.c_g())
}

/// Reconstruct a function on the ball of radius `radius` from its table.
pub fn reconstruct(table: &HelgasonTable, radius: usize, params: &TreeParams) -> Result<FiniteFunction> {
    let vertices = ball(radius, params);
    let values = vertices
        .par_iter()
        .map(|x| inverse_helgason(table, x, params))
        .collect::<Result<Vec<_>>>()?;
    FiniteFunction::from_values(radius, params, values)
}

/// A finitely supported function on `Z`, stored on `[l_min, l_min + len)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZFunction {
    l_min: i64,
    values: Vec<Complex64>,
}

impl ZFunction {
    pub fn new(l_min: i64, values: Vec<Complex64>) -> Self {
        Self { l_min, values }
    }

    pub fn delta(l: i64) -> Self {
        Self::new(l, vec![Complex64::new(1.0, 0.0)])
    }

    pub fn from_fn(l_min: i64, l_max: i64, f: impl FnMut(i64) -> Complex64) -> Self {
        Self::new(l_min, (l_min..=l_max).map(f).collect())
    }

    pub fn l_min(&self) -> i64 {
        self.l_min
    }

    pub fn l_max(&self) -> i64 {
        self.l_min + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, l: i64) -> Complex64 {
        let idx = l - self.l_min;
        if idx < 0 || idx >= self.values.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[idx as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.l_min + i as i64, v))
    }
}

/// Fourier transform on `Z`, `F f(s) = sum_d f(d) q^{-i d s}`.
pub fn z_fourier(f: &ZFunction, s: f64, params: &TreeParams) -> Complex64 {
    f.iter().fold(Complex64::new(0.0, 0.0), |acc, (d, v)| {
        acc + v * qpow(Complex64::new(0.0, -(d as f64) * s), params)
    })
}

/// Inverse transform `(1/tau) int_T F(s) q^{i l s} ds` by the grid quadrature.
pub fn z_inverse(
    f: impl Fn(f64) -> Complex64,
    l: i64,
    grid: &TorusGrid,
    params: &TreeParams,
) -> Complex64 {
    let sum = grid.nodes().iter().fold(Complex64::new(0.0, 0.0), |acc, &s| {
        acc + f(s) * qpow(Complex64::new(0.0, l as f64 * s), params)
    });
    sum * grid.weight() / grid.tau()
}
