//! Combinatorial geometry of the homogeneous tree.
//!
//! A vertex is the reduced word of child indices read from the root `o`. The
//! first letter picks one of the `q + 1` neighbours of the root and every later
//! letter one of the `q` forward children, so each vertex has exactly one word.
//! Words compare lexicographically (a prefix sorts before its extensions),
//! which is the enumeration order used throughout the crate.
//!
//! The distinguished doubly infinite geodesic through `o` is fixed as follows:
//! its positive half is the all-zeros ray and its negative half is the ray
//! `1, 0, 0, ...`. The translate `sigma^l . o` is identified with the vertex at
//! position `l` on this geodesic (see [`geodesic_vertex`]).

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Branching data of the tree: every vertex has `q + 1` neighbours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    q: u32,
    tau: f64,
    c_g: f64,
}

impl TreeParams {
    pub fn new(q: u32) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidBranching(q));
        }
        let qf = f64::from(q);
        let log_q = qf.ln();
        Ok(Self {
            q,
            tau: 2.0 * std::f64::consts::PI / log_q,
            c_g: qf * log_q / (4.0 * std::f64::consts::PI * (qf + 1.0)),
        })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn qf(&self) -> f64 {
        f64::from(self.q)
    }

    pub fn log_q(&self) -> f64 {
        self.qf().ln()
    }

    /// Period of the spectral variable, `2 pi / log q`.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Normalising constant of the inversion formula, `q log q / (4 pi (q + 1))`.
    pub fn c_g(&self) -> f64 {
        self.c_g
    }

    /// Number of vertices at distance exactly `d` from a fixed vertex.
    pub fn sphere_size(&self, d: usize) -> usize {
        if d == 0 {
            1
        } else {
            (self.q as usize + 1) * (self.q as usize).pow(d as u32 - 1)
        }
    }

    /// Number of vertices in a ball of radius `radius`.
    pub fn ball_size(&self, radius: usize) -> usize {
        (0..=radius).map(|d| self.sphere_size(d)).sum()
    }

    fn check_word(&self, word: &[u32]) -> Result<()> {
        for (pos, &letter) in word.iter().enumerate() {
            let bound = if pos == 0 { self.q + 1 } else { self.q };
            if letter >= bound {
                return Err(Error::InvalidWord {
                    word: word.to_vec(),
                    reason: format!("letter {letter} at position {pos} must be < {bound}"),
                });
            }
        }
        Ok(())
    }
}

/// A vertex of the tree, stored as its reduced word from the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Vertex {
    word: Vec<u32>,
}

impl Vertex {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn word(&self) -> &[u32] {
        &self.word
    }

    /// Distance to the root, `|x|`.
    pub fn depth(&self) -> usize {
        self.word.len()
    }

    pub fn is_root(&self) -> bool {
        self.word.is_empty()
    }

    pub fn parent(&self) -> Option<Vertex> {
        if self.word.is_empty() {
            None
        } else {
            Some(Vertex {
                word: self.word[..self.word.len() - 1].to_vec(),
            })
        }
    }

    fn child(&self, letter: u32) -> Vertex {
        let mut word = Vec::with_capacity(self.word.len() + 1);
        word.extend_from_slice(&self.word);
        word.push(letter);
        Vertex { word }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return f.write_str("o");
        }
        for (i, letter) in self.word.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{letter}")?;
        }
        Ok(())
    }
}

pub fn make_vertex(word: &[u32], params: &TreeParams) -> Result<Vertex> {
    params.check_word(word)?;
    Ok(Vertex {
        word: word.to_vec(),
    })
}

fn common_prefix_len(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Graph distance between two vertices.
pub fn distance(x: &Vertex, y: &Vertex) -> usize {
    x.depth() + y.depth() - 2 * common_prefix_len(&x.word, &y.word)
}

/// All vertices with `|x| <= radius`, in lexicographic order of their words.
pub fn ball(radius: usize, params: &TreeParams) -> Vec<Vertex> {
    let mut out = Vec::with_capacity(params.ball_size(radius));
    push_subtree(&Vertex::root(), radius, params, &mut out);
    out
}

// Pre-order traversal with increasing letters yields lexicographic order.
fn push_subtree(v: &Vertex, remaining: usize, params: &TreeParams, out: &mut Vec<Vertex>) {
    out.push(v.clone());
    if remaining == 0 {
        return;
    }
    let branches = if v.is_root() { params.q + 1 } else { params.q };
    for letter in 0..branches {
        push_subtree(&v.child(letter), remaining - 1, params, out);
    }
}

/// A depth-`D` cylinder of the boundary: all rays from `o` starting with `word`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCylinder {
    word: Vec<u32>,
    nu_mass: f64,
}

impl BoundaryCylinder {
    pub fn new(word: &[u32], params: &TreeParams) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::InvalidParameter(
                "boundary cylinders need depth >= 1".into(),
            ));
        }
        params.check_word(word)?;
        Ok(Self {
            word: word.to_vec(),
            nu_mass: cylinder_mass(word.len(), params),
        })
    }

    pub fn word(&self) -> &[u32] {
        &self.word
    }

    pub fn depth(&self) -> usize {
        self.word.len()
    }

    /// Harmonic measure of the cylinder, `1 / ((q + 1) q^(D - 1))`.
    pub fn nu_mass(&self) -> f64 {
        self.nu_mass
    }

    /// The vertex `omega_j` on the ray, for `j <= depth`.
    pub fn ray_vertex(&self, j: usize) -> Option<Vertex> {
        (j <= self.word.len()).then(|| Vertex {
            word: self.word[..j].to_vec(),
        })
    }
}

fn cylinder_mass(depth: usize, params: &TreeParams) -> f64 {
    let q = params.qf();
    1.0 / ((q + 1.0) * q.powi(depth as i32 - 1))
}

/// Every cylinder of the given depth, in lexicographic order.
pub fn boundary_cylinders(depth: usize, params: &TreeParams) -> Result<Vec<BoundaryCylinder>> {
    if depth == 0 {
        return Err(Error::InvalidParameter(
            "boundary cylinders need depth >= 1".into(),
        ));
    }
    let mass = cylinder_mass(depth, params);
    Ok(ball(depth, params)
        .into_iter()
        .filter(|v| v.depth() == depth)
        .map(|v| BoundaryCylinder {
            word: v.word,
            nu_mass: mass,
        })
        .collect())
}

/// Busemann height `h_omega(x) = lim_j (j - d(x, omega_j))`.
///
/// The limit is attained once `j >= |x|`, so the cylinder must be at least as
/// deep as `x`.
pub fn height(x: &Vertex, omega: &BoundaryCylinder) -> Result<i64> {
    if omega.depth() < x.depth() {
        return Err(Error::InsufficientDepth {
            depth: omega.depth(),
            needed: x.depth(),
        });
    }
    Ok(height_unchecked(x, &omega.word))
}

fn height_unchecked(x: &Vertex, ray: &[u32]) -> i64 {
    2 * common_prefix_len(&x.word, ray) as i64 - x.depth() as i64
}

/// Height of `x` with respect to the all-zeros ray, the positive half of the
/// distinguished geodesic. No depth restriction applies.
pub fn height_on_zero_ray(x: &Vertex) -> i64 {
    let zeros = x.word.iter().take_while(|&&l| l == 0).count();
    2 * zeros as i64 - x.depth() as i64
}

/// Vertex at position `l` on the distinguished geodesic: the all-zeros word of
/// length `l` for `l >= 0`, and `1, 0, ..., 0` of length `|l|` for `l < 0`.
pub fn geodesic_vertex(l: i64) -> Vertex {
    let len = l.unsigned_abs() as usize;
    let mut word = vec![0u32; len];
    if l < 0 {
        word[0] = 1;
    }
    Vertex { word }
}

/// Complex power of the Poisson kernel, `p(x, omega)^s = q^(s h_omega(x))`.
pub fn poisson_power(
    x: &Vertex,
    omega: &BoundaryCylinder,
    exponent: Complex64,
    params: &TreeParams,
) -> Result<Complex64> {
    let h = height(x, omega)?;
    Ok((exponent * (h as f64 * params.log_q())).exp())
}
