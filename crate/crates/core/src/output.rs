//! Field, diagnostics and convergence tables as comma-separated text.
//! Floating-point values use 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::convergence::ConvergenceRow;
use crate::error::{Error, Result};
use crate::run::DiagnosticsRow;
use crate::state::{checked_primitive, ConservedField};

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.display().to_string(), message: e.to_string() }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

#[inline]
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Field as rows of `x,z,rho,u,w,p,T` in storage order.
pub fn field_csv(field: &ConservedField) -> Result<String> {
    let g = field.params.gamma;
    let mut s = String::from("x,z,rho,u,w,p,T\n");
    for j in 0..field.grid.nz {
        for i in 0..field.grid.nx {
            let (x, z) = field.grid.center0(i, j);
            let k = field.grid.idx0(i, j);
            let (rho, u, w, p) = checked_primitive(&field.cell(k), g).map_err(|e| Error::CellState { i: i + 1, j: j + 1, reason: e.to_string() })?;
            let t = g * p / rho;
            let _ = writeln!(s, "{},{},{},{},{},{},{}", num(x), num(z), num(rho), num(u), num(w), num(p), num(t));
        }
    }
    Ok(s)
}

pub fn write_field_csv(path: &Path, field: &ConservedField) -> Result<()> {
    write_text(path, &field_csv(field)?)
}

/// Parses a field file back into (x, z, rho, u, w, p, T) rows.
pub fn read_field_csv(path: &Path) -> Result<Vec<[f64; 7]>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        let mut r = [0.0; 7];
        let mut count = 0;
        for (c, tok) in line.split(',').enumerate() {
            if c >= 7 {
                return Err(io_err(path, format!("line {}: too many columns", n + 1)));
            }
            r[c] = tok.trim().parse().map_err(|e| io_err(path, format!("line {}: {e}", n + 1)))?;
            count += 1;
        }
        if count != 7 {
            return Err(io_err(path, format!("line {}: expected 7 columns", n + 1)));
        }
        rows.push(r);
    }
    Ok(rows)
}

pub fn diagnostics_csv(rows: &[DiagnosticsRow]) -> String {
    let mut s = String::from("step,time,mass1,mass2,mass_loss,energy_loss,cr1,cr2\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.step,
            num(r.time),
            num(r.mass1),
            num(r.mass2),
            num(r.mass_loss),
            num(r.energy_loss),
            num(r.cr1),
            num(r.cr2)
        );
    }
    s
}

pub fn write_diagnostics_csv(path: &Path, rows: &[DiagnosticsRow]) -> Result<()> {
    write_text(path, &diagnostics_csv(rows))
}

fn order_cell(o: Option<f64>) -> String {
    o.map(num).unwrap_or_else(|| "-".into())
}

/// Convergence summary: one row per level with (error, order) pairs for
/// ρ, ρu and ρE.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("method,h,dt,cr1,cr2,rho_error,rho_order,momentum_error,momentum_order,energy_error,energy_order\n");
    for r in rows {
        let o = r.orders;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            num(r.h),
            num(r.dt),
            num(r.cr.0),
            num(r.cr.1),
            num(r.error.rho),
            order_cell(o.map(|o| o[0])),
            num(r.error.momentum),
            order_cell(o.map(|o| o[1])),
            num(r.error.energy),
            order_cell(o.map(|o| o[2])),
        );
    }
    s
}

pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    write_text(path, &convergence_csv(rows))
}

/// Human-readable convergence table in the (error, order) layout.
pub fn convergence_table(rows: &[ConvergenceRow]) -> String {
    let mut s = format!(
        "{:<16} {:>10} {:>10} {:>14} {:>10} {:>7} {:>10} {:>7} {:>10} {:>7}\n",
        "method", "h", "dt", "(Cr1,Cr2)", "rho", "order", "rho u", "order", "rho E", "order"
    );
    let ord = |o: Option<f64>| o.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
    for r in rows {
        let o = r.orders;
        let _ = writeln!(
            s,
            "{:<16} {:>10.4e} {:>10.4e} {:>14} {:>10.3e} {:>7} {:>10.3e} {:>7} {:>10.3e} {:>7}",
            r.method,
            r.h,
            r.dt,
            format!("({:.2},{:.2})", r.cr.0, r.cr.1),
            r.error.rho,
            ord(o.map(|o| o[0])),
            r.error.momentum,
            ord(o.map(|o| o[1])),
            r.error.energy,
            ord(o.map(|o| o[2])),
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::{CaseSpec, GridSizes};

    #[test]
    fn field_round_trip() {
        let st = CaseSpec::from_name("density-wave").unwrap().init(GridSizes { nx: 4, nz1: 4, nz2: 0 }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_field_csv(&path, &st.q1).unwrap();
        let rows = read_field_csv(&path).unwrap();
        assert_eq!(rows.len(), 16);
        for (k, r) in rows.iter().enumerate() {
            let p = st.q1.primitive(k % 4 + 1, k / 4 + 1).unwrap();
            assert_eq!(r[2], p.rho);
            assert_eq!(r[5], p.p);
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("1.2500000000000000e-1,"));
    }

    #[test]
    fn io_error_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let e = write_text(&blocker.join("sub/out.csv"), "x").unwrap_err();
        assert!(e.to_string().contains("file"), "{e}");
    }
}
