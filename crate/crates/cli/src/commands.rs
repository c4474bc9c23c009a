use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treeharm::export::{fmt_f64, write_runtime_footer, write_sweep, write_transference};
use treeharm::norm_lab::{norm_growth_sweep, transference_probe, DEFAULT_MAX_ITERS};
use treeharm::pdo_tree::{kernel_direct, kernel_shifted};
use treeharm::spectral::spherical_function;
use treeharm::transforms::{helgason_transform, reconstruct, FiniteFunction};
use treeharm::tree::ball;
use treeharm::{Complex64, TorusGrid};

use crate::config::{CommonArgs, Settings};
use crate::CliError;

fn io_err(e: std::io::Error) -> CliError {
    CliError::Config(format!("cannot write output: {e}"))
}

fn lib<T>(r: treeharm::Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::from_library)
}

fn grid(s: &Settings, params: &treeharm::TreeParams) -> Result<TorusGrid, CliError> {
    lib(TorusGrid::new(s.get_or("nodes", 512usize)?, params))
}

fn emit(s: &Settings, csv: &[u8]) -> Result<(), CliError> {
    match s.path("out") {
        Some(path) => fs::write(&path, csv).map_err(io_err),
        None => std::io::stdout().write_all(csv).map_err(io_err),
    }
}

/// Gnuplot script plotting column `y` against column `x` of the output CSV.
fn emit_plot(s: &Settings, x: &str, y: &str, log_y: bool) -> Result<(), CliError> {
    let Some(script) = s.path("plot") else {
        return Ok(());
    };
    let data = s
        .path("out")
        .ok_or_else(|| CliError::Config("--plot needs --out for the data file".into()))?;
    let data_name = data
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| data.display().to_string());
    let mut text = String::new();
    text.push_str("set datafile separator \",\"\n");
    text.push_str("set key autotitle columnhead\n");
    text.push_str(&format!("set xlabel \"{x}\"\nset ylabel \"{y}\"\n"));
    if log_y {
        text.push_str("set logscale y\n");
    }
    text.push_str(&format!("plot \"{data_name}\" using \"{x}\":\"{y}\" with linespoints\n"));
    fs::write(Path::new(&script), text).map_err(io_err)
}

fn tolerance_check(max_err: f64, tol: f64, what: &str) -> Result<(), CliError> {
    if max_err < tol {
        Ok(())
    } else {
        Err(CliError::Tolerance(format!(
            "{what} {max_err:e} is not below {tol:e}"
        )))
    }
}

pub fn invert_roundtrip(common: &CommonArgs) -> Result<(), CliError> {
    let s = Settings::new(common, vec![], &[])?;
    let params = s.params()?;
    let grid = grid(&s, &params)?;
    let radius = s.get_or("radius", 3usize)?;
    let depth = s.get_or("depth", radius.max(1))?;
    let seed = s.get_or("seed", 0u64)?;
    let tol = s.get_or("tol", 1e-8)?;

    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = FiniteFunction::from_fn(radius, &params, |_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let table = lib(helgason_transform(&f, &grid, depth))?;
    let g = lib(reconstruct(&table, radius, &params))?;
    let elapsed = started.elapsed().as_secs_f64() * 1e3;

    let mut max_err: f64 = 0.0;
    let mut body = String::new();
    for ((x, a), b) in f.iter().zip(g.values()) {
        let err = (a - b).norm();
        max_err = max_err.max(err);
        body.push_str(&format!(
            "{x},{},{},{},{},{}\n",
            fmt_f64(a.re),
            fmt_f64(a.im),
            fmt_f64(b.re),
            fmt_f64(b.im),
            fmt_f64(err)
        ));
    }
    let mut out = Vec::new();
    let header = format!(
        "# q={}\n# R={radius}\n# N={}\n# D={depth}\n# seed={seed}\n# max_error={}\nvertex,re,im,re_reconstructed,im_reconstructed,abs_err\n",
        params.q(),
        grid.len(),
        fmt_f64(max_err)
    );
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(body.as_bytes());
    write_runtime_footer(&mut out, [elapsed]).map_err(io_err)?;
    emit(&s, &out)?;
    emit_plot(&s, "vertex", "abs_err", true)?;
    tolerance_check(max_err, tol, "max reconstruction error")
}

pub fn kernel_check(common: &CommonArgs) -> Result<(), CliError> {
    let s = Settings::new(common, vec![], &[])?;
    let params = s.params()?;
    let grid = grid(&s, &params)?;
    let radius = s.get_or("radius", 2usize)?;
    let p = s.exponent(1.5)?;
    let tol = s.get_or("tol", 1e-8)?;
    let spec = s.symbol()?;
    let sym = lib(spec.build(&params))?;

    let started = Instant::now();
    let mut max_err: f64 = 0.0;
    let mut body = String::new();
    for x in ball(radius, &params) {
        for d in 0..=2 * radius {
            let a = lib(kernel_direct(sym.as_ref(), &x, d, &grid, &params))?;
            let b = lib(kernel_shifted(sym.as_ref(), &x, d, p, &grid, &params))?;
            let err = (a - b).norm();
            max_err = max_err.max(err);
            body.push_str(&format!(
                "{x},{d},{},{},{},{},{}\n",
                fmt_f64(a.re),
                fmt_f64(a.im),
                fmt_f64(b.re),
                fmt_f64(b.im),
                fmt_f64(err)
            ));
        }
    }
    let elapsed = started.elapsed().as_secs_f64() * 1e3;
    let mut out = Vec::new();
    let header = format!(
        "# q={}\n# R={radius}\n# N={}\n# symbol={}\n# p={}\n# max_discrepancy={}\nvertex,d,direct_re,direct_im,shifted_re,shifted_im,abs_diff\n",
        params.q(),
        grid.len(),
        sym.id(),
        fmt_f64(p),
        fmt_f64(max_err)
    );
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(body.as_bytes());
    write_runtime_footer(&mut out, [elapsed]).map_err(io_err)?;
    emit(&s, &out)?;
    emit_plot(&s, "d", "abs_diff", true)?;
    tolerance_check(max_err, tol, "max kernel discrepancy")
}

pub fn norm_sweep(
    common: &CommonArgs,
    radii: Option<String>,
    max_iters: Option<usize>,
) -> Result<(), CliError> {
    let s = Settings::new(
        common,
        vec![("radii", radii), ("max-iters", max_iters.map(|v| v.to_string()))],
        &["radii", "max-iters"],
    )?;
    let params = s.params()?;
    let grid = grid(&s, &params)?;
    let ps = s.exponents("1.5")?;
    let radii: Vec<usize> = match (s.raw("radii"), s.get::<usize>("radius")?) {
        (None, Some(r)) => (1..=r).collect(),
        _ => s.list("radii", "1,2,3,4")?,
    };
    let seed = s.get_or("seed", 0u64)?;
    let max_iters = s.get_or("max-iters", DEFAULT_MAX_ITERS)?;
    let spec = s.symbol()?;

    let rows = lib(norm_growth_sweep(&spec, &ps, &radii, &grid, &params, seed, max_iters))?;
    let mut out = Vec::new();
    write_sweep(&mut out, &rows).map_err(io_err)?;
    emit(&s, &out)?;
    emit_plot(&s, "R", "norm_lb", false)
}

pub fn transference(
    common: &CommonArgs,
    tree_radius: Option<usize>,
    max_iters: Option<usize>,
) -> Result<(), CliError> {
    let s = Settings::new(
        common,
        vec![
            ("tree-radius", tree_radius.map(|v| v.to_string())),
            ("max-iters", max_iters.map(|v| v.to_string())),
        ],
        &["tree-radius", "max-iters"],
    )?;
    let params = s.params()?;
    let grid = grid(&s, &params)?;
    let p = s.exponent(1.5)?;
    let window = s.get_or("window", 16usize)?;
    let tree_radius = s.get_or("tree-radius", window.min(3))?;
    let seed = s.get_or("seed", 0u64)?;
    let max_iters = s.get_or("max-iters", DEFAULT_MAX_ITERS)?;
    let sym = lib(s.symbol()?.build(&params))?;

    let started = Instant::now();
    let report = lib(transference_probe(sym, p, window, tree_radius, &grid, &params, max_iters, seed))?;
    let elapsed = started.elapsed().as_secs_f64() * 1e3;
    let mut out = Vec::new();
    write_transference(&mut out, params.q(), grid.len(), seed, &report).map_err(io_err)?;
    write_runtime_footer(&mut out, [elapsed]).map_err(io_err)?;
    emit(&s, &out)?;
    emit_plot(&s, "z_norm_lb", "tree_norm_lb", false)
}

pub fn spherical_table(
    common: &CommonArgs,
    z: Option<String>,
    max_dist: Option<usize>,
) -> Result<(), CliError> {
    let s = Settings::new(
        common,
        vec![("z", z), ("max-dist", max_dist.map(|v| v.to_string()))],
        &["z", "max-dist"],
    )?;
    let params = s.params()?;
    let zs: Vec<Complex64> = s.list("z", "0")?;
    let max_dist = s.get_or("max-dist", 4usize)?;
    let mut out = String::new();
    out.push_str(&format!("# q={}\nz_re,z_im,d,re,im\n", params.q()));
    for z in zs {
        for d in 0..=max_dist {
            let v = spherical_function(z, d, &params);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(CliError::Config(format!("phi_z(d) is not finite at z = {z}")));
            }
            out.push_str(&format!(
                "{},{},{d},{},{}\n",
                fmt_f64(z.re),
                fmt_f64(z.im),
                fmt_f64(v.re),
                fmt_f64(v.im)
            ));
        }
    }
    emit(&s, out.as_bytes())?;
    emit_plot(&s, "d", "re", false)
}
