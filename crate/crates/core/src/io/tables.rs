use std::io::Write;

use serde::Serialize;

use super::Result;
use crate::defects::DefectTrace;
use crate::solver::Diagnostics;
use crate::weak_strong::{ResolutionTrace, StudyReport};

/// Shortest round-trip representation, with exponents for extreme values.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn table<W: Write>(w: W, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for r in rows {
        out.write_record(&r)?;
    }
    out.flush()?;
    Ok(())
}

/// `t, mass, momentum_1 .. momentum_dim, energy, min_s, violations`.
pub fn write_series_csv<W: Write>(w: W, series: &[Diagnostics], dim: usize) -> Result<()> {
    let mut header = vec!["t".to_string(), "mass".to_string()];
    header.extend((1..=dim).map(|k| format!("momentum_{k}")));
    header.extend(["energy", "min_s", "violations"].map(String::from));
    let rows = series.iter().map(|d| {
        let mut r = vec![num(d.t), num(d.mass)];
        r.extend(d.momentum[..dim].iter().map(|&m| num(m)));
        r.extend([num(d.energy), num(d.min_s), d.violations.to_string()]);
        r
    });
    table(w, &header, rows)
}

pub const DEFECT_COLUMNS: [&str; 6] =
    ["tau", "D", "D_oscillation", "D_scheme", "mu_R_norm_cumulative", "c_fit_running"];

pub fn write_defect_csv<W: Write>(w: W, trace: &DefectTrace) -> Result<()> {
    let header = DEFECT_COLUMNS.map(String::from);
    let d = &trace.dissipation;
    let rows = (0..trace.times.len()).map(|k| {
        vec![
            num(trace.times[k]),
            num(d.d[k]),
            num(d.d_oscillation[k]),
            num(d.d_scheme[k]),
            num(trace.mu_r_cumulative[k]),
            num(trace.c_fit_running[k]),
        ]
    });
    table(w, &header, rows)
}

pub const STUDY_COLUMNS: [&str; 7] = ["t", "relenergy", "D", "mu_R_norm_cumulative", "lhs", "rhs", "residual"];

pub fn write_study_trace_csv<W: Write>(w: W, trace: &ResolutionTrace) -> Result<()> {
    let header = STUDY_COLUMNS.map(String::from);
    let ineq = &trace.inequality;
    let rows = (0..trace.relenergy.times.len()).map(|k| {
        vec![
            num(trace.relenergy.times[k]),
            num(trace.relenergy.value[k]),
            num(trace.defects.dissipation.d[k]),
            num(trace.defects.mu_r_cumulative[k]),
            num(ineq.lhs[k]),
            num(ineq.rhs[k]),
            num(ineq.residual[k]),
        ]
    });
    table(w, &header, rows)
}

/// Pretty JSON with a trailing newline. Non-finite floats become `null`.
pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_study_json<W: Write>(w: W, report: &StudyReport) -> Result<()> {
    write_json(w, report)
}
