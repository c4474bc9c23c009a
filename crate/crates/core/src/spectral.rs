//! The c-function, spherical functions, the Plancherel density and midpoint
//! grids on the torus `T = R / tau Z`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tree::TreeParams;

/// Below this distance from the lattice `(tau / 2) Z` the closed-form special
/// branches of the spherical function are used instead of the generic one.
pub const BRANCH_THRESHOLD: f64 = 1e-8;

/// Smallest admissible `|q^{iz} - q^{-iz}|` in [`c_function`].
pub const POLE_THRESHOLD: f64 = 1e-12;

/// `delta_p = |1/p - 1/2|`, the halfwidth of the strip `S_p`.
pub fn delta_p(p: f64) -> f64 {
    if p.is_infinite() {
        0.5
    } else {
        (1.0 / p - 0.5).abs()
    }
}

/// Conjugate exponent `p' = p / (p - 1)`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// A spectral parameter inside the closed strip `|Im z| <= delta_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripPoint {
    z: Complex64,
    p: f64,
    strip_halfwidth: f64,
}

impl StripPoint {
    pub fn new(z: Complex64, p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p = {p} must be >= 1")));
        }
        let strip_halfwidth = delta_p(p);
        if z.im.abs() > strip_halfwidth {
            return Err(Error::InvalidParameter(format!(
                "Im z = {} lies outside the strip of halfwidth {strip_halfwidth}",
                z.im
            )));
        }
        Ok(Self {
            z,
            p,
            strip_halfwidth,
        })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn strip_halfwidth(&self) -> f64 {
        self.strip_halfwidth
    }

    /// `S_p` and `S_p'` coincide.
    pub fn same_strip_for_conjugate(&self) -> bool {
        (delta_p(conjugate_exponent(self.p)) - self.strip_halfwidth).abs() < 1e-15
    }
}

/// `q^w` for complex `w`.
#[inline]
pub(crate) fn qpow(w: Complex64, params: &TreeParams) -> Complex64 {
    (w * params.log_q()).exp()
}

/// Index `k` of the nearest lattice point `k tau / 2` and the distance to it.
fn nearest_half_lattice(z: Complex64, params: &TreeParams) -> (i64, f64) {
    let half = 0.5 * params.tau();
    let k = (z.re / half).round();
    let dist = Complex64::new(z.re - k * half, z.im).norm();
    (k as i64, dist)
}

fn c_unchecked(z: Complex64, params: &TreeParams) -> Complex64 {
    let q = params.qf();
    let iz = Complex64::i() * z;
    let num = qpow(iz + 0.5, params) - qpow(-iz - 0.5, params);
    let den = qpow(iz, params) - qpow(-iz, params);
    q.sqrt() / (q + 1.0) * num / den
}

/// The c-function
/// `c(z) = q^{1/2}/(q+1) * (q^{1/2+iz} - q^{-1/2-iz}) / (q^{iz} - q^{-iz})`.
pub fn c_function(z: Complex64, params: &TreeParams) -> Result<Complex64> {
    let iz = Complex64::i() * z;
    let den = qpow(iz, params) - qpow(-iz, params);
    if den.norm() < POLE_THRESHOLD {
        return Err(Error::PoleProximity {
            z: z.to_string(),
            threshold: POLE_THRESHOLD,
        });
    }
    Ok(c_unchecked(z, params))
}

/// `1 / c(z)`, holomorphic on `Im z > -1/2` (it vanishes on the pole set of `c`).
pub fn c_reciprocal(z: Complex64, params: &TreeParams) -> Complex64 {
    let q = params.qf();
    let iz = Complex64::i() * z;
    let num = qpow(iz, params) - qpow(-iz, params);
    let den = qpow(iz + 0.5, params) - qpow(-iz - 0.5, params);
    (q + 1.0) / q.sqrt() * num / den
}

/// Elementary spherical function `phi_z` at distance `dist` from the origin.
pub fn spherical_function(z: Complex64, dist: usize, params: &TreeParams) -> Complex64 {
    let (k, gap) = nearest_half_lattice(z, params);
    if gap < BRANCH_THRESHOLD {
        let q = params.qf();
        let d = dist as f64;
        let base = ((q - 1.0) / (q + 1.0) * d + 1.0) * q.powf(-0.5 * d);
        let sign = if k.rem_euclid(2) == 1 && dist % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        return Complex64::new(sign * base, 0.0);
    }
    let iz = Complex64::i() * z;
    let d = dist as f64;
    c_unchecked(z, params) * qpow((iz - 0.5) * d, params)
        + c_unchecked(-z, params) * qpow((-iz - 0.5) * d, params)
}

/// Plancherel density `|c(s)|^{-2}` on the real torus.
///
/// Evaluated through the equivalent trigonometric form
/// `(q+1)^2/q * (2 - 2 cos 2t) / (q + 1/q - 2 cos 2t)` with `t = s log q`,
/// which extends continuously by `0` to the pole set `(tau / 2) Z`.
pub fn plancherel_density(s: f64, params: &TreeParams) -> f64 {
    let q = params.qf();
    let cos2 = (2.0 * s * params.log_q()).cos();
    (q + 1.0) * (q + 1.0) / q * (2.0 - 2.0 * cos2) / (q + 1.0 / q - 2.0 * cos2)
}

/// Midpoint grid on `[-tau/2, tau/2)` with `n` nodes of equal weight `tau / n`.
///
/// With `n` even no node falls on `(tau / 2) Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    nodes: Vec<f64>,
    weight: f64,
    tau: f64,
}

impl TorusGrid {
    pub fn new(n: usize, params: &TreeParams) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(n));
        }
        let tau = params.tau();
        let weight = tau / n as f64;
        let nodes = (0..n)
            .map(|k| -0.5 * tau + (k as f64 + 0.5) * weight)
            .collect();
        Ok(Self { nodes, weight, tau })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

pub fn torus_grid(n: usize, params: &TreeParams) -> Result<TorusGrid> {
    TorusGrid::new(n, params)
}
