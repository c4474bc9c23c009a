//! Flat `key = value` config files merged under command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use treeharm::symbols::SymbolSpec;
use treeharm::TreeParams;

use crate::CliError;

/// Flags shared by every subcommand. Each one may also be set in the config
/// file under the same name (without the dashes); the flag wins.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Branching number: every vertex has q + 1 neighbours.
    #[arg(long)]
    pub q: Option<u32>,
    /// Lebesgue exponent; norm-sweep accepts a comma-separated list.
    #[arg(long)]
    pub p: Option<String>,
    /// Ball radius on the tree.
    #[arg(long)]
    pub radius: Option<usize>,
    /// Half-width L of the lattice window [-L, L].
    #[arg(long)]
    pub window: Option<usize>,
    /// Quadrature nodes on the torus (even, at least 4).
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Depth of the boundary cylinders.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Symbol, e.g. `identity`, `trig(0,1)`, `pole(halfwidth=0.1)`,
    /// `product(parity,trig(1,0.5))`.
    #[arg(long)]
    pub symbol: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write a gnuplot script reading the output CSV.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

/// Keys a config file may set, per subcommand on top of the common ones.
const COMMON_KEYS: &[&str] = &[
    "q", "p", "radius", "window", "nodes", "depth", "symbol", "seed", "tol", "out", "plot",
];

pub struct Settings {
    flags: BTreeMap<String, String>,
    file: BTreeMap<String, String>,
}

fn parse_file(path: &Path, allowed: &[&str]) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("{}:{}: expected key = value", path.display(), n + 1))
        })?;
        let key = key.trim().replace('_', "-");
        if !COMMON_KEYS.contains(&key.as_str()) && !allowed.contains(&key.as_str()) {
            return Err(CliError::Config(format!(
                "{}:{}: unknown key `{key}`",
                path.display(),
                n + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

impl Settings {
    /// `extra` holds subcommand flags as `(key, value)` pairs; `allowed`
    /// lists the subcommand keys accepted in the config file.
    pub fn new(
        common: &CommonArgs,
        extra: Vec<(&str, Option<String>)>,
        allowed: &[&str],
    ) -> Result<Self, CliError> {
        let file = match &common.config {
            Some(path) => parse_file(path, allowed)?,
            None => BTreeMap::new(),
        };
        let mut flags = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                flags.insert(k.to_string(), v);
            }
        };
        put("q", common.q.map(|v| v.to_string()));
        put("p", common.p.clone());
        put("radius", common.radius.map(|v| v.to_string()));
        put("window", common.window.map(|v| v.to_string()));
        put("nodes", common.nodes.map(|v| v.to_string()));
        put("depth", common.depth.map(|v| v.to_string()));
        put("symbol", common.symbol.clone());
        put("seed", common.seed.map(|v| v.to_string()));
        put("tol", common.tol.map(|v| format!("{v:e}")));
        put("out", common.out.as_ref().map(|v| v.display().to_string()));
        put("plot", common.plot.as_ref().map(|v| v.display().to_string()));
        for (k, v) in extra {
            put(k, v);
        }
        Ok(Self { flags, file })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.flags
            .get(key)
            .or_else(|| self.file.get(key))
            .map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("invalid value `{v}` for {key}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn list<T: FromStr>(&self, key: &str, default: &str) -> Result<Vec<T>, CliError> {
        let raw = self.raw(key).unwrap_or(default);
        raw.split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("invalid entry `{v}` in {key}")))
            })
            .collect()
    }

    pub fn params(&self) -> Result<TreeParams, CliError> {
        let q = self.get_or("q", 2u32)?;
        TreeParams::new(q).map_err(CliError::from_library)
    }

    /// A single `p` in `(1, inf)`.
    pub fn exponent(&self, default: f64) -> Result<f64, CliError> {
        let p: f64 = self.get_or("p", default)?;
        check_exponent(p)?;
        Ok(p)
    }

    pub fn exponents(&self, default: &str) -> Result<Vec<f64>, CliError> {
        let ps: Vec<f64> = self.list("p", default)?;
        for &p in &ps {
            check_exponent(p)?;
        }
        Ok(ps)
    }

    pub fn symbol(&self) -> Result<SymbolSpec, CliError> {
        let raw = self.raw("symbol").unwrap_or("identity");
        raw.parse()
            .map_err(|e| CliError::Config(format!("invalid symbol `{raw}`: {e}")))
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }
}

fn check_exponent(p: f64) -> Result<(), CliError> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("p = {p} must lie in (1, inf)")))
    }
}
