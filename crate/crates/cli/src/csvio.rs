//! CSV writers for the experiment outputs. Floats use Rust's shortest
//! round-trip formatting, so identical runs produce byte-identical files.

use std::io::Write;

use dichotomy_core::spectral::SpectralEstimate;

use crate::stats::EnsembleSummary;

/// `index,lyapunov,bohl_lo_<H>,bohl_hi_<H>,...` with one row per direction
/// (1-based index).
pub fn write_spectrum<W: Write>(w: &mut W, est: &SpectralEstimate) -> std::io::Result<()> {
    write!(w, "index,lyapunov")?;
    for (window, _) in &est.bohl {
        write!(w, ",bohl_lo_{window},bohl_hi_{window}")?;
    }
    writeln!(w)?;
    for i in 0..est.lyapunov.len() {
        write!(w, "{},{}", i + 1, est.lyapunov[i])?;
        for (_, pairs) in &est.bohl {
            write!(w, ",{},{}", pairs[i].0, pairs[i].1)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// One observer-run sample per grid point.
#[derive(Debug, Clone, Copy)]
pub struct RunRow {
    pub t: f64,
    pub error_norm: f64,
    pub min_eig_p1: f64,
    pub max_eig_p1: f64,
}

/// `t,error_norm,min_eig_p1,max_eig_p1`.
pub fn write_run<W: Write>(w: &mut W, rows: &[RunRow]) -> std::io::Result<()> {
    writeln!(w, "t,error_norm,min_eig_p1,max_eig_p1")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.t, r.error_norm, r.min_eig_p1, r.max_eig_p1)?;
    }
    Ok(())
}

/// `t,min,median,q80,max`.
pub fn write_ensemble<W: Write>(w: &mut W, s: &EnsembleSummary) -> std::io::Result<()> {
    writeln!(w, "t,min,median,q80,max")?;
    for i in 0..s.times.len() {
        writeln!(
            w,
            "{},{},{},{},{}",
            s.times[i], s.min[i], s.median[i], s.q80[i], s.max[i]
        )?;
    }
    Ok(())
}

/// `t,reference` decay line.
pub fn write_reference<W: Write>(w: &mut W, rows: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(w, "t,reference")?;
    for (t, v) in rows {
        writeln!(w, "{t},{v}")?;
    }
    Ok(())
}

/// One verification check outcome.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Measured value the check compared against its tolerance.
    pub value: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, pass: bool, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            pass,
            value,
            tolerance,
        }
    }
}

/// `check,status,value,tolerance`.
pub fn write_verify<W: Write>(w: &mut W, checks: &[CheckResult]) -> std::io::Result<()> {
    writeln!(w, "check,status,value,tolerance")?;
    for c in checks {
        writeln!(
            w,
            "{},{},{},{}",
            c.name,
            if c.pass { "pass" } else { "fail" },
            c.value,
            c.tolerance
        )?;
    }
    Ok(())
}
