//! CSV writers.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which round-trips
//! every `f64`. Lines end in LF. Lines starting with `#` carry metadata;
//! timing data only ever appears on `#runtime_ms` lines, so stripping those
//! leaves byte-reproducible content.

use std::io::{self, Write};

use crate::norm_lab::{SweepRow, TransferenceReport};
use crate::pdo_tree::KernelSection;
use crate::pdo_z::ZSection;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_else(|| "none".into())
}

/// `# key=value` header, then `i,j,d,re,im`.
pub fn write_kernel_section<W: Write>(w: &mut W, section: &KernelSection) -> io::Result<()> {
    writeln!(w, "# q={}", section.q)?;
    writeln!(w, "# R={}", section.radius)?;
    writeln!(w, "# N={}", section.n_nodes)?;
    writeln!(w, "# symbol={}", section.symbol_id)?;
    writeln!(w, "# p={}", fmt_opt(section.p))?;
    writeln!(w, "i,j,d,re,im")?;
    let m = section.entries();
    for i in 0..section.len() {
        for j in 0..section.len() {
            let v = m.get(i, j);
            writeln!(w, "{i},{j},{},{},{}", section.distance(i, j), fmt_f64(v.re), fmt_f64(v.im))?;
        }
    }
    Ok(())
}

/// `# key=value` header, then `l,d,re,im`.
pub fn write_z_section<W: Write>(w: &mut W, section: &ZSection, p: Option<f64>) -> io::Result<()> {
    writeln!(w, "# q={}", section.q)?;
    writeln!(w, "# L={}", section.half_width)?;
    writeln!(w, "# N={}", section.n_nodes)?;
    writeln!(w, "# symbol={}", section.symbol_id)?;
    writeln!(w, "# p={}", fmt_opt(p))?;
    writeln!(w, "l,d,re,im")?;
    let m = section.matrix();
    for i in 0..section.len() {
        for j in 0..section.len() {
            let v = m.get(i, j);
            writeln!(w, "{},{},{},{}", section.point(i), section.point(j), fmt_f64(v.re), fmt_f64(v.im))?;
        }
    }
    Ok(())
}

pub const SWEEP_HEADER: &str = "q,p,R,N,symbol,norm_lb,iters,converged,seed,runtime_ms";

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Sweep rows sorted by `(p, R, symbol)`. The `runtime_ms` cells are left
/// empty; the timings go to a trailing `#runtime_ms,...` line in row order.
pub fn write_sweep<W: Write>(w: &mut W, rows: &[SweepRow]) -> io::Result<()> {
    let mut sorted: Vec<&SweepRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.p.total_cmp(&b.p)
            .then(a.radius.cmp(&b.radius))
            .then_with(|| a.symbol.cmp(&b.symbol))
    });
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in &sorted {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},",
            r.q,
            fmt_f64(r.p),
            r.radius,
            r.n_nodes,
            quote(&r.symbol),
            fmt_f64(r.norm_lb),
            r.iterations,
            r.converged,
            r.seed
        )?;
    }
    write_runtime_footer(w, sorted.iter().map(|r| r.runtime_ms))
}

pub fn write_runtime_footer<W: Write>(w: &mut W, times: impl IntoIterator<Item = f64>) -> io::Result<()> {
    let cells: Vec<String> = times.into_iter().map(|t| format!("{t:.3}")).collect();
    writeln!(w, "#runtime_ms,{}", cells.join(","))
}

pub const TRANSFERENCE_HEADER: &str =
    "q,p,shift,L,R,N,symbol,z_norm_lb,z_iters,z_converged,tree_norm_lb,tree_iters,tree_converged,seed";

pub fn write_transference<W: Write>(
    w: &mut W,
    q: u32,
    n_nodes: usize,
    seed: u64,
    report: &TransferenceReport,
) -> io::Result<()> {
    writeln!(w, "{TRANSFERENCE_HEADER}")?;
    writeln!(
        w,
        "{q},{},{},{},{},{n_nodes},{},{},{},{},{},{},{},{seed}",
        fmt_f64(report.p),
        fmt_f64(report.shift),
        report.window,
        report.tree_radius,
        quote(&report.symbol),
        fmt_f64(report.z_norm.value),
        report.z_norm.iterations,
        report.z_norm.converged,
        fmt_f64(report.tree_norm.value),
        report.tree_norm.iterations,
        report.tree_norm.converged,
    )
}

/// Content with every `#runtime_ms` line removed.
pub fn strip_runtime(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with("#runtime_ms"))
        .map(|l| format!("{l}\n"))
        .collect()
}
