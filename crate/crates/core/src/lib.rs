//! Harmonic analysis on the homogeneous tree of degree `q + 1`.
//!
//! The crate covers the combinatorial geometry of the tree (vertices, balls,
//! boundary cylinders, Busemann heights), the spherical functions and the
//! Plancherel density, Helgason-Fourier and spherical transforms, symbols and
//! pseudo-differential operators on the tree and on the lattice `Z`, and a
//! small laboratory for estimating induced `L^p` norms of finite sections.
//!
//! All spectral integrals over the torus `R / tau Z` use the midpoint rule of
//! [`spectral::TorusGrid`]. Every enumeration order is lexicographic, and every
//! reduction runs in a fixed order, so parallel assembly is bit-reproducible.

pub mod error;
pub mod export;
pub mod linalg;
pub mod norm_lab;
pub mod pdo_tree;
pub mod pdo_z;
pub mod spectral;
pub mod symbols;
pub mod transforms;
pub mod tree;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectral::{StripPoint, TorusGrid};
pub use tree::{BoundaryCylinder, TreeParams, Vertex};
