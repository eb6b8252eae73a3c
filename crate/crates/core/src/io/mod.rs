//! File formats: field snapshots, diagnostics and certification CSVs, and the
//! plain-text run configuration.

mod config;

pub use config::{MocConfig, RunConfig};

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::moc::CertificationReport;
use crate::solver::DiagnosticsRecord;
use crate::spectral::{Grid, PhysicalField, SpectralField, HERMITIAN_TOL};

/// Largest grid size a snapshot may declare.
pub const MAX_SNAPSHOT_N: usize = 16384;

const MAGIC: &str = "mqg-field v1";

/// Decoded snapshot payload.
#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotField {
    Physical(PhysicalField),
    Spectral(SpectralField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub field: SnapshotField,
}

fn header(n: usize, kind: &str, time: f64) -> Result<String> {
    if !time.is_finite() {
        return Err(Error::NonFinite("snapshot time"));
    }
    Ok(format!("{MAGIC} n={n} kind={kind} time={time:?}\n"))
}

/// Header line, then `n²` little-endian `f64`, row-major.
pub fn write_physical_snapshot(w: &mut impl Write, f: &PhysicalField, time: f64) -> Result<()> {
    w.write_all(header(f.grid().n(), "physical", time)?.as_bytes())?;
    let mut buf = Vec::with_capacity(8 * f.values().len());
    for v in f.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Header line, then `n²` complex coefficients as interleaved `re, im`.
pub fn write_spectral_snapshot(w: &mut impl Write, f: &SpectralField, time: f64) -> Result<()> {
    w.write_all(header(f.grid().n(), "spectral", time)?.as_bytes())?;
    let mut buf = Vec::with_capacity(16 * f.coeffs().len());
    for c in f.coeffs() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Snapshot(msg.into())
}

/// Parses a complete snapshot. The payload length must match the header
/// exactly; spectral payloads must be Hermitian.
pub fn read_snapshot(bytes: &[u8]) -> Result<Snapshot> {
    let nl = bytes
        .iter()
        .take(256)
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("no header line"))?;
    let head = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not UTF-8"))?;
    let rest = head.strip_prefix(MAGIC).ok_or_else(|| bad("missing magic"))?;
    let fields: Vec<&str> = rest.split_ascii_whitespace().collect();
    let [n, kind, time] = fields[..] else {
        return Err(bad("header must have n, kind and time"));
    };
    let value = |field: &'static str, token: &str| -> Result<String> {
        token
            .strip_prefix(field)
            .and_then(|t| t.strip_prefix('='))
            .map(str::to_owned)
            .ok_or_else(|| bad(format!("expected {field}=…, got `{token}`")))
    };
    let n: usize = value("n", n)?.parse().map_err(|_| bad("bad n"))?;
    if n == 0 || n > MAX_SNAPSHOT_N || !n.is_multiple_of(2) {
        return Err(bad(format!("n = {n} must be even and in 2..={MAX_SNAPSHOT_N}")));
    }
    let kind = value("kind", kind)?;
    let time: f64 = value("time", time)?.parse().map_err(|_| bad("bad time"))?;
    if !time.is_finite() {
        return Err(bad("time is not finite"));
    }
    let payload = &bytes[nl + 1..];
    let width = match kind.as_str() {
        "physical" => 8,
        "spectral" => 16,
        other => return Err(bad(format!("unknown kind `{other}`"))),
    };
    if payload.len() != width * n * n {
        return Err(bad(format!(
            "payload has {} bytes, expected {}",
            payload.len(),
            width * n * n
        )));
    }
    let grid = Grid::new(n)?;
    let floats = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let field = if width == 8 {
        SnapshotField::Physical(PhysicalField::new(grid, floats.collect())?)
    } else {
        let flat: Vec<f64> = floats.collect();
        let coeffs = flat.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        let f = SpectralField::new(grid, coeffs)?;
        let defect = f.hermitian_defect();
        if defect > HERMITIAN_TOL * f.max_abs_coeff().max(f64::MIN_POSITIVE) {
            return Err(Error::NonHermitianInput { residue: defect });
        }
        SnapshotField::Spectral(f)
    };
    Ok(Snapshot { time, field })
}

/// Float formatting used by every CSV: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// `t,l2,linf,grad_linf,diss_int,grad_alpha_int` plus `lp_<p>` per norm.
pub fn diagnostics_header(lp_norms: &[f64]) -> String {
    let mut h = String::from("t,l2,linf,grad_linf,diss_int,grad_alpha_int");
    for p in lp_norms {
        h.push_str(&format!(",lp_{p}"));
    }
    h
}

pub fn diagnostics_row(r: &DiagnosticsRecord) -> String {
    let mut cols = vec![r.t, r.l2, r.linf, r.grad_linf, r.diss_int, r.grad_alpha_int];
    cols.extend(r.lp.iter().map(|&(_, v)| v));
    cols.into_iter().map(fmt_f64).collect::<Vec<_>>().join(",")
}

pub fn write_diagnostics(w: &mut impl Write, lp_norms: &[f64], records: &[DiagnosticsRecord]) -> Result<()> {
    writeln!(w, "{}", diagnostics_header(lp_norms))?;
    for r in records {
        writeln!(w, "{}", diagnostics_row(r))?;
    }
    Ok(())
}

/// Reads a diagnostics CSV back into records; `lp` entries take their `p`
/// from the header.
pub fn read_diagnostics(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| Error::Config("empty diagnostics file".into()))?;
    let cols: Vec<&str> = head.split(',').collect();
    if cols.len() < 6 || cols[..6].join(",") != diagnostics_header(&[]) {
        return Err(Error::Config(format!("unexpected diagnostics header `{head}`")));
    }
    let ps = cols[6..]
        .iter()
        .map(|c| {
            c.strip_prefix("lp_")
                .and_then(|p| p.parse::<f64>().ok())
                .ok_or_else(|| Error::Config(format!("bad column `{c}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let v = line
                .split(',')
                .map(|x| x.parse::<f64>().map_err(|_| Error::Config(format!("bad number `{x}`"))))
                .collect::<Result<Vec<_>>>()?;
            if v.len() != cols.len() {
                return Err(Error::Config(format!("row has {} columns, expected {}", v.len(), cols.len())));
            }
            Ok(DiagnosticsRecord {
                t: v[0],
                l2: v[1],
                linf: v[2],
                grad_linf: v[3],
                diss_int: v[4],
                grad_alpha_int: v[5],
                lp: ps.iter().copied().zip(v[6..].iter().copied()).collect(),
            })
        })
        .collect()
}

/// `xi,margin,error_bound`, one row per sample.
pub fn write_certification(w: &mut impl Write, report: &CertificationReport) -> Result<()> {
    writeln!(w, "xi,margin,error_bound")?;
    for ((x, m), e) in report.xi_samples.iter().zip(&report.margins).zip(&report.error_bounds) {
        writeln!(w, "{},{},{}", fmt_f64(*x), fmt_f64(*m), fmt_f64(*e))?;
    }
    Ok(())
}
