//! Symbols of pseudo-differential operators.
//!
//! Three families share the same conventions: tree symbols `Psi(x, z)`,
//! multipliers `m(z)` (vertex independent, so every multiplier is also a tree
//! symbol) and lattice symbols `psi(l, s)`. Each symbol declares the halfwidth
//! of the horizontal strip on which it is holomorphic and exposes derivatives
//! in the spectral variable up to order two.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tree::{geodesic_vertex, TreeParams, Vertex};

/// Step of the central finite differences used when a symbol has no analytic
/// derivative.
pub const FD_STEP: f64 = 1e-5;

/// Samples for the Weyl check stay this far inside the declared strip.
pub const STRIP_MARGIN: f64 = 1e-6;

fn finite_difference(
    k: u8,
    z: Complex64,
    f: impl Fn(Complex64) -> Result<Complex64>,
) -> Result<Complex64> {
    let h = FD_STEP;
    match k {
        0 => f(z),
        1 => Ok((f(z + h)? - f(z - h)?) / (2.0 * h)),
        2 => Ok((f(z + h)? - f(z)? * 2.0 + f(z - h)?) / (h * h)),
        _ => Err(Error::InvalidParameter(format!(
            "derivative order {k} is not supported (max 2)"
        ))),
    }
}

/// A multiplier `m(z)` on the strip.
pub trait MultiplierSymbol: Send + Sync {
    fn id(&self) -> String;

    fn eval(&self, z: Complex64) -> Result<Complex64>;

    /// `d^k m / dz^k` for `k <= 2`; `k = 0` is [`MultiplierSymbol::eval`].
    fn derivative(&self, z: Complex64, k: u8) -> Result<Complex64> {
        finite_difference(k, z, |w| self.eval(w))
    }

    /// Halfwidth of the strip of holomorphy (`INFINITY` for entire symbols).
    fn strip_halfwidth(&self) -> f64;

    /// Largest `|n|` of a mode `q^{i n s}` in the symbol, when finite.
    fn bandwidth(&self) -> Option<usize> {
        None
    }
}

/// A symbol `Psi(x, z)` on the tree.
pub trait TreeSymbol: Send + Sync {
    fn id(&self) -> String;

    fn eval(&self, x: &Vertex, z: Complex64) -> Result<Complex64>;

    fn derivative(&self, x: &Vertex, z: Complex64, k: u8) -> Result<Complex64> {
        finite_difference(k, z, |w| self.eval(x, w))
    }

    fn strip_halfwidth(&self) -> f64;

    /// True when the symbol does not depend on the vertex.
    fn is_multiplier(&self) -> bool {
        false
    }
}

impl<M: MultiplierSymbol + ?Sized> TreeSymbol for M {
    fn id(&self) -> String {
        MultiplierSymbol::id(self)
    }

    fn eval(&self, _x: &Vertex, z: Complex64) -> Result<Complex64> {
        MultiplierSymbol::eval(self, z)
    }

    fn derivative(&self, _x: &Vertex, z: Complex64, k: u8) -> Result<Complex64> {
        MultiplierSymbol::derivative(self, z, k)
    }

    fn strip_halfwidth(&self) -> f64 {
        MultiplierSymbol::strip_halfwidth(self)
    }

    fn is_multiplier(&self) -> bool {
        true
    }
}

/// A symbol `psi(l, s)` on `Z x T`.
pub trait ZSymbol: Send + Sync {
    fn id(&self) -> String;

    fn eval(&self, l: i64, s: Complex64) -> Result<Complex64>;

    fn derivative(&self, l: i64, s: Complex64, k: u8) -> Result<Complex64> {
        finite_difference(k, s, |w| self.eval(l, w))
    }

    fn bandwidth(&self) -> Option<usize> {
        None
    }

    /// True when the symbol does not depend on `l`.
    fn is_multiplier(&self) -> bool {
        false
    }
}

/// `m(z) = sum_k a_k cos(k z log q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigMultiplier {
    coeffs: Vec<f64>,
    log_q: f64,
}

pub fn trig_multiplier(coeffs: &[f64], params: &TreeParams) -> TrigMultiplier {
    TrigMultiplier {
        coeffs: coeffs.to_vec(),
        log_q: params.log_q(),
    }
}

impl TrigMultiplier {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

impl MultiplierSymbol for TrigMultiplier {
    fn id(&self) -> String {
        SymbolSpec::Trig(self.coeffs.clone()).to_string()
    }

    fn eval(&self, z: Complex64) -> Result<Complex64> {
        MultiplierSymbol::derivative(self, z, 0)
    }

    fn derivative(&self, z: Complex64, k: u8) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let freq = n as f64 * self.log_q;
            let arg = z * freq;
            let term = match k {
                0 => arg.cos(),
                1 => -arg.sin() * freq,
                2 => -arg.cos() * (freq * freq),
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "derivative order {k} is not supported (max 2)"
                    )))
                }
            };
            acc += term * a;
        }
        Ok(acc)
    }

    fn strip_halfwidth(&self) -> f64 {
        f64::INFINITY
    }

    fn bandwidth(&self) -> Option<usize> {
        Some(
            self.coeffs
                .iter()
                .rposition(|&a| a != 0.0)
                .unwrap_or(0),
        )
    }
}

/// `m(z) = 1 / (alpha - cos(z log q))`, holomorphic for
/// `|Im z| < arccosh(alpha) / log q`.
///
/// Evaluation at or beyond that halfwidth returns a symbol-domain error, even
/// where the meromorphic continuation would be finite.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleMultiplier {
    alpha: f64,
    log_q: f64,
}

pub fn pole_multiplier(alpha: f64, params: &TreeParams) -> Result<PoleMultiplier> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "pole multiplier needs alpha > 1, got {alpha}"
        )));
    }
    Ok(PoleMultiplier {
        alpha,
        log_q: params.log_q(),
    })
}

/// Pole multiplier whose strip of holomorphy has the given halfwidth.
pub fn pole_multiplier_with_halfwidth(halfwidth: f64, params: &TreeParams) -> Result<PoleMultiplier> {
    if !(halfwidth > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "holomorphy halfwidth must be positive, got {halfwidth}"
        )));
    }
    pole_multiplier((halfwidth * params.log_q()).cosh(), params)
}

impl PoleMultiplier {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn check(&self, z: Complex64) -> Result<()> {
        if z.im.abs() >= MultiplierSymbol::strip_halfwidth(self) {
            return Err(Error::SymbolDomain {
                symbol: MultiplierSymbol::id(self),
                z: z.to_string(),
            });
        }
        Ok(())
    }
}

impl MultiplierSymbol for PoleMultiplier {
    fn id(&self) -> String {
        SymbolSpec::Pole(self.alpha).to_string()
    }

    fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.check(z)?;
        Ok(1.0 / (self.alpha - (z * self.log_q).cos()))
    }

    fn derivative(&self, z: Complex64, k: u8) -> Result<Complex64> {
        self.check(z)?;
        let l = self.log_q;
        let arg = z * l;
        let g = self.alpha - arg.cos();
        let g1 = arg.sin() * l;
        let g2 = arg.cos() * (l * l);
        match k {
            0 => Ok(1.0 / g),
            1 => Ok(-g1 / (g * g)),
            2 => Ok(-g2 / (g * g) + g1 * g1 * 2.0 / (g * g * g)),
            _ => Err(Error::InvalidParameter(format!(
                "derivative order {k} is not supported (max 2)"
            ))),
        }
    }

    fn strip_halfwidth(&self) -> f64 {
        self.alpha.acosh() / self.log_q
    }
}

/// A bounded function of the vertex, used as the spatial factor of a product
/// symbol.
#[derive(Clone)]
pub struct VertexFactor {
    name: String,
    f: Arc<dyn Fn(&Vertex) -> Complex64 + Send + Sync>,
}

impl VertexFactor {
    pub fn new(name: &str, f: impl Fn(&Vertex) -> Complex64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.to_string(),
            f: Arc::new(f),
        }
    }

    pub fn one() -> Self {
        Self::new("one", |_| Complex64::new(1.0, 0.0))
    }

    /// `1 + (-1)^{|x|} / 2`.
    pub fn parity() -> Self {
        Self::new("parity", |x| {
            let sign = if x.depth() % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::new(1.0 + 0.5 * sign, 0.0)
        })
    }

    /// `1 / (1 + |x|)`.
    pub fn decay() -> Self {
        Self::new("decay", |x| Complex64::new(1.0 / (1.0 + x.depth() as f64), 0.0))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn at(&self, x: &Vertex) -> Complex64 {
        (self.f)(x)
    }
}

impl fmt::Debug for VertexFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VertexFactor").field("name", &self.name).finish()
    }
}

/// `Psi(x, z) = u(x) m(z)`.
#[derive(Clone)]
pub struct ProductSymbol {
    u: VertexFactor,
    m: Arc<dyn MultiplierSymbol>,
}

pub fn product_symbol(u: VertexFactor, m: Arc<dyn MultiplierSymbol>) -> ProductSymbol {
    ProductSymbol { u, m }
}

impl TreeSymbol for ProductSymbol {
    fn id(&self) -> String {
        format!("product({},{})", self.u.name(), self.m.id())
    }

    fn eval(&self, x: &Vertex, z: Complex64) -> Result<Complex64> {
        Ok(self.u.at(x) * self.m.eval(z)?)
    }

    fn derivative(&self, x: &Vertex, z: Complex64, k: u8) -> Result<Complex64> {
        Ok(self.u.at(x) * self.m.derivative(z, k)?)
    }

    fn strip_halfwidth(&self) -> f64 {
        self.m.strip_halfwidth()
    }
}

/// A multiplier viewed as a lattice symbol, `psi(l, s) = m(s)`.
#[derive(Clone)]
pub struct ZMultiplier(pub Arc<dyn MultiplierSymbol>);

impl ZSymbol for ZMultiplier {
    fn id(&self) -> String {
        self.0.id()
    }

    fn eval(&self, _l: i64, s: Complex64) -> Result<Complex64> {
        self.0.eval(s)
    }

    fn derivative(&self, _l: i64, s: Complex64, k: u8) -> Result<Complex64> {
        self.0.derivative(s, k)
    }

    fn bandwidth(&self) -> Option<usize> {
        self.0.bandwidth()
    }

    fn is_multiplier(&self) -> bool {
        true
    }
}

/// `psi(l, s) = u(l) m(s)` on the lattice.
#[derive(Clone)]
pub struct ZProductSymbol {
    name: String,
    u: Arc<dyn Fn(i64) -> Complex64 + Send + Sync>,
    m: Arc<dyn MultiplierSymbol>,
}

impl ZProductSymbol {
    pub fn new(
        name: &str,
        u: impl Fn(i64) -> Complex64 + Send + Sync + 'static,
        m: Arc<dyn MultiplierSymbol>,
    ) -> Self {
        Self {
            name: name.to_string(),
            u: Arc::new(u),
            m,
        }
    }

    pub fn factor(&self, l: i64) -> Complex64 {
        (self.u)(l)
    }
}

impl ZSymbol for ZProductSymbol {
    fn id(&self) -> String {
        format!("zproduct({},{})", self.name, self.m.id())
    }

    fn eval(&self, l: i64, s: Complex64) -> Result<Complex64> {
        Ok((self.u)(l) * self.m.eval(s)?)
    }

    fn derivative(&self, l: i64, s: Complex64, k: u8) -> Result<Complex64> {
        Ok((self.u)(l) * self.m.derivative(s, k)?)
    }

    fn bandwidth(&self) -> Option<usize> {
        self.m.bandwidth()
    }
}

/// The lattice symbol induced by a tree symbol along the distinguished
/// geodesic: `psi(l, s) = Psi(sigma^l . o, s - i shift)`.
#[derive(Clone)]
pub struct InducedZSymbol {
    tree: Arc<dyn TreeSymbol>,
    shift: f64,
}

impl InducedZSymbol {
    pub fn new(tree: Arc<dyn TreeSymbol>, shift: f64) -> Self {
        Self { tree, shift }
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }
}

impl ZSymbol for InducedZSymbol {
    fn id(&self) -> String {
        format!("induced({},{})", self.tree.id(), self.shift)
    }

    fn eval(&self, l: i64, s: Complex64) -> Result<Complex64> {
        self.tree
            .eval(&geodesic_vertex(l), s - Complex64::new(0.0, self.shift))
    }

    fn derivative(&self, l: i64, s: Complex64, k: u8) -> Result<Complex64> {
        self.tree
            .derivative(&geodesic_vertex(l), s - Complex64::new(0.0, self.shift), k)
    }

    fn is_multiplier(&self) -> bool {
        self.tree.is_multiplier()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylReport {
    pub max_even_defect: f64,
    pub max_period_defect: f64,
    pub pass: bool,
}

/// `|Psi(x, z) - Psi(x, -z)|`.
pub fn even_defect<S: TreeSymbol + ?Sized>(sym: &S, x: &Vertex, z: Complex64) -> Result<f64> {
    Ok((sym.eval(x, z)? - sym.eval(x, -z)?).norm())
}

/// `|Psi(x, z) - Psi(x, z + tau)|`.
pub fn period_defect<S: TreeSymbol + ?Sized>(
    sym: &S,
    x: &Vertex,
    z: Complex64,
    params: &TreeParams,
) -> Result<f64> {
    Ok((sym.eval(x, z)? - sym.eval(x, z + params.tau())?).norm())
}

/// Sample evenness and `tau`-periodicity of a symbol on its strip.
///
/// Spectral samples are uniform on `[-tau/2, tau/2) x [-w, w]` where `w` is
/// the declared halfwidth (capped at 1/2) less [`STRIP_MARGIN`]; every sample
/// is checked at every vertex of `vertices`.
pub fn check_weyl_invariance<S: TreeSymbol + ?Sized>(
    sym: &S,
    vertices: &[Vertex],
    n_samples: usize,
    tol: f64,
    seed: u64,
    params: &TreeParams,
) -> Result<WeylReport> {
    let width = (sym.strip_halfwidth().min(0.5) - STRIP_MARGIN).max(0.0);
    let half_tau = 0.5 * params.tau();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_even_defect: f64 = 0.0;
    let mut max_period_defect: f64 = 0.0;
    for _ in 0..n_samples {
        let re = rng.gen_range(-half_tau..half_tau);
        let im = if width > 0.0 {
            rng.gen_range(-width..=width)
        } else {
            0.0
        };
        let z = Complex64::new(re, im);
        for x in vertices {
            max_even_defect = max_even_defect.max(even_defect(sym, x, z)?);
            max_period_defect = max_period_defect.max(period_defect(sym, x, z, params)?);
        }
    }
    Ok(WeylReport {
        max_even_defect,
        max_period_defect,
        pass: max_even_defect < tol && max_period_defect < tol,
    })
}

/// Sampled Calderon-Vaillancourt seminorm
/// `sup |d^k/dz^k Psi(x, s + i v)|` over `x`, `s` and `k = 0, 1, 2`.
///
/// This is a lower estimate of the supremum over the whole line.
pub fn cv_seminorm<S: TreeSymbol + ?Sized>(
    sym: &S,
    x_set: &[Vertex],
    s_grid: &[f64],
    shift: f64,
) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for x in x_set {
        for &s in s_grid {
            let z = Complex64::new(s, shift);
            for k in 0..=2 {
                let v = sym.derivative(x, z, k)?.norm();
                if !v.is_finite() {
                    return Err(Error::SymbolDomain {
                        symbol: sym.id(),
                        z: z.to_string(),
                    });
                }
                sup = sup.max(v);
            }
        }
    }
    Ok(sup)
}

/// A named symbol, as accepted on the command line.
///
/// Grammar: `identity`, `trig(a0,a1,...)`, `pole(alpha=A)`,
/// `pole(halfwidth=H)`, `product(FACTOR,SPEC)` with `FACTOR` one of `one`,
/// `parity`, `decay` and `SPEC` a multiplier.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolSpec {
    Trig(Vec<f64>),
    Pole(f64),
    PoleHalfwidth(f64),
    Product { factor: String, inner: Box<SymbolSpec> },
}

impl SymbolSpec {
    pub fn identity() -> Self {
        SymbolSpec::Trig(vec![1.0])
    }

    pub fn build_multiplier(&self, params: &TreeParams) -> Result<Arc<dyn MultiplierSymbol>> {
        match self {
            SymbolSpec::Trig(c) => Ok(Arc::new(trig_multiplier(c, params))),
            SymbolSpec::Pole(alpha) => Ok(Arc::new(pole_multiplier(*alpha, params)?)),
            SymbolSpec::PoleHalfwidth(h) => {
                Ok(Arc::new(pole_multiplier_with_halfwidth(*h, params)?))
            }
            SymbolSpec::Product { .. } => Err(Error::InvalidParameter(format!(
                "{self} is not a multiplier"
            ))),
        }
    }

    pub fn build(&self, params: &TreeParams) -> Result<Arc<dyn TreeSymbol>> {
        match self {
            SymbolSpec::Product { factor, inner } => {
                let u = match factor.as_str() {
                    "one" => VertexFactor::one(),
                    "parity" => VertexFactor::parity(),
                    "decay" => VertexFactor::decay(),
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown vertex factor {other:?}"
                        )))
                    }
                };
                Ok(Arc::new(product_symbol(u, inner.build_multiplier(params)?)))
            }
            _ => {
                let m = self.build_multiplier(params)?;
                Ok(Arc::new(MultiplierAsTree(m)))
            }
        }
    }
}

// Lets an `Arc<dyn MultiplierSymbol>` be used where a tree symbol is expected.
struct MultiplierAsTree(Arc<dyn MultiplierSymbol>);

impl TreeSymbol for MultiplierAsTree {
    fn id(&self) -> String {
        self.0.id()
    }

    fn eval(&self, _x: &Vertex, z: Complex64) -> Result<Complex64> {
        self.0.eval(z)
    }

    fn derivative(&self, _x: &Vertex, z: Complex64, k: u8) -> Result<Complex64> {
        self.0.derivative(z, k)
    }

    fn strip_halfwidth(&self) -> f64 {
        self.0.strip_halfwidth()
    }

    fn is_multiplier(&self) -> bool {
        true
    }
}

impl fmt::Display for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolSpec::Trig(c) => {
                f.write_str("trig(")?;
                for (i, a) in c.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            SymbolSpec::Pole(alpha) => write!(f, "pole(alpha={alpha})"),
            SymbolSpec::PoleHalfwidth(h) => write!(f, "pole(halfwidth={h})"),
            SymbolSpec::Product { factor, inner } => write!(f, "product({factor},{inner})"),
        }
    }
}

impl FromStr for SymbolSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidParameter(format!("symbol {text:?}: {why}"));
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if t == "identity" {
            return Ok(SymbolSpec::identity());
        }
        let open = t.find('(').ok_or_else(|| bad("expected NAME(ARGS)"))?;
        if !t.ends_with(')') {
            return Err(bad("missing closing parenthesis"));
        }
        let (name, args) = (&t[..open], &t[open + 1..t.len() - 1]);
        let number = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(&format!("{s:?} is not a finite number")))
        };
        match name {
            "trig" => {
                let coeffs = args.split(',').map(number).collect::<Result<Vec<_>>>()?;
                Ok(SymbolSpec::Trig(coeffs))
            }
            "pole" => {
                let (key, value) = args.split_once('=').ok_or_else(|| bad("expected KEY=VALUE"))?;
                match key {
                    "alpha" => Ok(SymbolSpec::Pole(number(value)?)),
                    "halfwidth" => Ok(SymbolSpec::PoleHalfwidth(number(value)?)),
                    _ => Err(bad("pole takes alpha= or halfwidth=")),
                }
            }
            "product" => {
                let (factor, inner) = args.split_once(',').ok_or_else(|| bad("expected FACTOR,SPEC"))?;
                if !matches!(factor, "one" | "parity" | "decay") {
                    return Err(bad("factor must be one, parity or decay"));
                }
                let inner: SymbolSpec = inner.parse()?;
                if matches!(inner, SymbolSpec::Product { .. }) {
                    return Err(bad("nested products are not supported"));
                }
                Ok(SymbolSpec::Product {
                    factor: factor.to_string(),
                    inner: Box::new(inner),
                })
            }
            _ => Err(bad("unknown symbol kind")),
        }
    }
}
