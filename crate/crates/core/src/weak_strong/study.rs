use rayon::prelude::*;
use serde::Serialize;

use super::{classical_window, default_cutoff, rel_energy_trace, ws_inequality_residual};
use super::{ClassicalSolution, InequalityResidual, RelEnergyTrace};
use crate::defects::{defect_trace, DefectTrace};
use crate::numerics::loglog_slope;
use crate::thermo::CutOff;
use crate::young::{run_ensemble, EnsembleSpec, InitialData, Result, YoungError};

/// Relative energies at or below this are treated as exact agreement.
pub const EXACT_FLOOR: f64 = 1e-12;

/// Tolerance factor applied to the initial total energy.
pub const RELATIVE_TOLERANCE: f64 = 1e-6;

/// Per-resolution output of the study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolutionTrace {
    pub resolution: usize,
    pub cutoff: CutOff,
    pub relenergy: RelEnergyTrace,
    pub defects: DefectTrace,
    pub inequality: InequalityResidual,
}

/// Refinement study summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub resolutions: Vec<usize>,
    pub relenergy_finals: Vec<f64>,
    pub fitted_alpha: Option<f64>,
    #[serde(rename = "D_finals")]
    pub d_finals: Vec<f64>,
    pub inequality_min_residual: f64,
    pub pass: bool,
    #[serde(skip)]
    pub initial_energy: f64,
    #[serde(skip)]
    pub traces: Vec<ResolutionTrace>,
}

impl StudyReport {
    /// Absolute tolerance `1e-6 x initial energy`.
    pub fn tolerance(&self) -> f64 {
        RELATIVE_TOLERANCE * self.initial_energy
    }

    pub fn is_exact(&self) -> bool {
        self.relenergy_finals.iter().all(|v| v.abs() <= EXACT_FLOOR)
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.is_exact() || self.relenergy_finals.windows(2).all(|w| w[1] < w[0])
    }

    /// `D(T)` does not grow under refinement beyond the tolerance.
    pub fn dissipation_non_increasing(&self) -> bool {
        let tol = self.tolerance();
        self.d_finals.windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

/// Runs the ensemble, builds the measures and evaluates the relative energy
/// and the inequality residual at every resolution.
///
/// The ensemble's initial data must be `sol` at `t = 0`.
pub fn weak_strong_study(spec: &EnsembleSpec, sol: &ClassicalSolution) -> Result<StudyReport> {
    match &spec.initial {
        InitialData::Classical { solution } if solution == sol => {}
        _ => {
            return Err(YoungError::InvalidSpec(
                "study initial data must be the classical solution at t = 0".into(),
            ))
        }
    }
    sol.validate().map_err(YoungError::InvalidSpec)?;
    let model = &spec.model;
    let members = run_ensemble(spec)?;
    let traces: Vec<ResolutionTrace> = members
        .par_iter()
        .map(|m| {
            let z = default_cutoff(&m.fine, model)?;
            let (defects, _) = defect_trace(&m.measure, &m.fine, &m.energy_trace, model)?;
            let window = classical_window(&m.measure, sol, model).ok();
            let relenergy = rel_energy_trace(&m.measure, sol, model, &CutOff::identity(), window.as_ref())?;
            let inequality = ws_inequality_residual(&m.measure, &defects, sol, model, &z)?;
            Ok(ResolutionTrace { resolution: m.resolution, cutoff: z, relenergy, defects, inequality })
        })
        .collect::<Result<_>>()?;

    let finest = members.iter().max_by_key(|m| m.resolution).expect("at least two members");
    let initial_energy = finest.energy_trace[0];
    let relenergy_finals: Vec<f64> = traces.iter().map(|t| *t.relenergy.value.last().unwrap()).collect();
    let d_finals = traces.iter().map(|t| *t.defects.dissipation.d.last().unwrap()).collect();
    let inequality_min_residual = traces
        .iter()
        .map(|t| t.inequality.min_residual())
        .fold(f64::INFINITY, f64::min);

    let mut report = StudyReport {
        resolutions: spec.resolutions.clone(),
        relenergy_finals,
        fitted_alpha: None,
        d_finals,
        inequality_min_residual,
        pass: false,
        initial_energy,
        traces,
    };
    if !report.is_exact() {
        let h: Vec<f64> = report.resolutions.iter().map(|&n| spec.length / n as f64).collect();
        report.fitted_alpha = loglog_slope(&h, &report.relenergy_finals);
    }
    let alpha_ok = report.is_exact() || report.fitted_alpha.is_some_and(|a| a > 0.5);
    report.pass = report.strictly_decreasing() && alpha_ok && report.dissipation_non_increasing();
    Ok(report)
}
