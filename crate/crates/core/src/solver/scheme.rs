use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flux::{numerical_flux, CellPrim, Speeds};
use super::monitors::{min_entropy_monitor, Diagnostics};
use super::{CellState, ConservedField, FluxKind, Result, SolverError};
use crate::thermo::{CutOff, ThermoModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeConfig {
    pub flux: FluxKind,
    pub cfl: f64,
    pub t_end: f64,
    pub rho_floor: f64,
    /// Entropy floor for the monitors; `None` uses the initial minimum.
    pub s0: Option<f64>,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            flux: FluxKind::LocalLaxFriedrichs,
            cfl: 0.45,
            t_end: 0.25,
            rho_floor: 1e-12,
            s0: None,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 0.9) {
            return Err(SolverError::InvalidConfig(format!("cfl ∈ (0, 0.9] required, got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(SolverError::InvalidConfig(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if !(self.rho_floor >= 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "rho_floor must be >= 0, got {}",
                self.rho_floor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub field: ConservedField,
    pub dt: f64,
    pub floored_cells: usize,
    pub floored_mass: f64,
}

fn primitives(field: &ConservedField, model: &ThermoModel) -> Result<Vec<CellPrim>> {
    if let Some((cell, c)) = field
        .cells
        .iter()
        .enumerate()
        .find(|(_, c)| !(c.rho >= 0.0) || !(c.internal_energy() >= 0.0) || !c.total_energy.is_finite())
    {
        return Err(SolverError::PositivityLost {
            t: field.t,
            cell,
            rho: c.rho,
            internal: c.internal_energy(),
        });
    }
    Ok(field.cells.par_iter().map(|c| CellPrim::new(c, model)).collect())
}

/// One forward-Euler step with the largest stable `dt`.
pub fn step(field: &ConservedField, cfg: &SchemeConfig, model: &ThermoModel) -> Result<ConservedField> {
    step_detailed(field, cfg, model, f64::INFINITY).map(|o| o.field)
}

/// One forward-Euler step with `dt = min(cfl h / sum_k max|u_k| + c, dt_max)`.
pub fn step_detailed(
    field: &ConservedField,
    cfg: &SchemeConfig,
    model: &ThermoModel,
    dt_max: f64,
) -> Result<StepOutcome> {
    let grid = field.grid;
    let dim = grid.dim();
    let h = grid.h();
    let prims = primitives(field, model)?;

    let speed_sum: f64 = (0..dim)
        .map(|axis| prims.iter().map(|p| p.max_speed(axis)).fold(0.0, f64::max))
        .sum();
    let stable = if speed_sum > 0.0 { cfg.cfl * h / speed_sum } else { f64::INFINITY };
    let dt = stable.min(dt_max);
    if !speed_sum.is_finite() || !(stable > 1e-12 * h) || !(dt > 0.0) || !dt.is_finite() {
        return Err(SolverError::Instability { t: field.t, dt, max_speed: speed_sum });
    }

    let cells = &field.cells;
    let fluxes: Vec<Vec<[f64; 5]>> = (0..dim)
        .map(|axis| {
            (0..cells.len())
                .into_par_iter()
                .map(|i| {
                    let j = grid.neighbor(i, axis, true);
                    numerical_flux(cfg.flux, &cells[i], &prims[i], &cells[j], &prims[j], axis)
                })
                .collect()
        })
        .collect();

    let ratio = dt / h;
    let mut next: Vec<CellState> = (0..cells.len())
        .into_par_iter()
        .map(|i| {
            let mut q = cells[i].to_array();
            for (axis, f) in fluxes.iter().enumerate() {
                let back = grid.neighbor(i, axis, false);
                for k in 0..5 {
                    q[k] -= ratio * (f[i][k] - f[back][k]);
                }
            }
            CellState::from_array(q)
        })
        .collect();

    let mut floored_cells = 0;
    let mut floored_mass = 0.0;
    for c in next.iter_mut() {
        if c.rho < cfg.rho_floor {
            floored_cells += 1;
            floored_mass += cfg.rho_floor - c.rho;
            c.rho = cfg.rho_floor;
            c.momentum = [0.0; 3];
            c.total_energy = c.total_energy.max(0.0);
        }
    }

    let field = ConservedField { grid, t: field.t + dt, cells: next };
    primitives(&field, model)?;
    Ok(StepOutcome { field, dt, floored_cells, floored_mass })
}

/// Cell-wise residual of `d_t(rho Z(s)) + div(Z(s) m)` between two
/// consecutive states, using the entropy flux consistent with `flux`.
///
/// Negative entries measure violation of the renormalized entropy
/// inequality.
pub fn entropy_residual(
    before: &ConservedField,
    after: &ConservedField,
    z: &CutOff,
    model: &ThermoModel,
    flux: FluxKind,
) -> Result<Vec<f64>> {
    entropy_residual_with(before, after, model, flux, |s| z.apply(s))
}

/// As [`entropy_residual`] with an arbitrary renormalization `z`.
pub fn entropy_residual_with<Z>(
    before: &ConservedField,
    after: &ConservedField,
    model: &ThermoModel,
    flux: FluxKind,
    z: Z,
) -> Result<Vec<f64>>
where
    Z: Fn(f64) -> f64 + Sync,
{
    if before.grid != after.grid {
        return Err(SolverError::Domain("entropy residual needs matching grids".into()));
    }
    let dt = after.t - before.t;
    if !(dt > 0.0) {
        return Err(SolverError::Domain(format!("entropy residual needs after.t > before.t, dt = {dt}")));
    }
    let grid = before.grid;
    let h = grid.h();
    let prims = primitives(before, model)?;
    let zs: Vec<f64> = before
        .cells
        .par_iter()
        .map(|c| z(model.entropy_unchecked(c.rho, c.internal_energy())))
        .collect();
    let eta = |c: &CellState, zc: f64| if c.rho > 0.0 { c.rho * zc } else { 0.0 };

    let cells = &before.cells;
    let fluxes: Vec<Vec<f64>> = (0..grid.dim())
        .map(|axis| {
            (0..cells.len())
                .into_par_iter()
                .map(|i| {
                    let j = grid.neighbor(i, axis, true);
                    let speeds = Speeds::at(flux, &prims[i], &prims[j], axis);
                    speeds.combine(
                        [zs[i] * cells[i].momentum[axis]],
                        [zs[j] * cells[j].momentum[axis]],
                        [eta(&cells[i], zs[i])],
                        [eta(&cells[j], zs[j])],
                    )[0]
                })
                .collect()
        })
        .collect();

    Ok((0..cells.len())
        .into_par_iter()
        .map(|i| {
            let c1 = &after.cells[i];
            let z1 = z(model.entropy_unchecked(c1.rho, c1.internal_energy()));
            let mut r = (eta(c1, z1) - eta(&cells[i], zs[i])) / dt;
            for (axis, g) in fluxes.iter().enumerate() {
                r += (g[i] - g[grid.neighbor(i, axis, false)]) / h;
            }
            r
        })
        .collect())
}

/// Output of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// States at the requested sample times, in order.
    pub snapshots: Vec<ConservedField>,
    /// One row per accepted step, plus the initial state.
    pub series: Vec<Diagnostics>,
    pub final_state: ConservedField,
    pub steps: usize,
    pub s0: f64,
    pub floored_mass: f64,
    pub floored_cells: usize,
}

/// Integrates from `initial.t` to `cfg.t_end`, stopping exactly on every
/// sample time.
pub fn run(
    initial: ConservedField,
    cfg: &SchemeConfig,
    model: &ThermoModel,
    sample_times: &[f64],
) -> Result<RunOutput> {
    run_with(initial, cfg, model, sample_times, |_, _| {})
}

/// As [`run`], calling `observer(before, outcome)` after each step.
pub fn run_with<F>(
    initial: ConservedField,
    cfg: &SchemeConfig,
    model: &ThermoModel,
    sample_times: &[f64],
    mut observer: F,
) -> Result<RunOutput>
where
    F: FnMut(&ConservedField, &StepOutcome),
{
    cfg.validate()?;
    let t0 = initial.t;
    if sample_times.windows(2).any(|w| !(w[0] <= w[1]))
        || sample_times.iter().any(|&t| t < t0 || t > cfg.t_end)
    {
        return Err(SolverError::InvalidConfig(format!(
            "sample times must be sorted within [{t0}, {}]",
            cfg.t_end
        )));
    }
    let s0 = match cfg.s0 {
        Some(s) => s,
        None => min_entropy_monitor(&initial, f64::NEG_INFINITY, model, cfg.rho_floor).min_s,
    };

    let mut snapshots = Vec::with_capacity(sample_times.len());
    let mut series = vec![Diagnostics::compute(&initial, model, s0, cfg.rho_floor)];
    let mut next_sample = 0;
    let mut state = initial;
    let (mut steps, mut floored_mass, mut floored_cells) = (0, 0.0, 0);

    loop {
        while next_sample < sample_times.len() && sample_times[next_sample] <= state.t {
            snapshots.push(state.clone());
            next_sample += 1;
        }
        if state.t >= cfg.t_end {
            break;
        }
        let target = sample_times.get(next_sample).copied().unwrap_or(cfg.t_end).min(cfg.t_end);
        let out = step_detailed(&state, cfg, model, target - state.t)?;
        let mut out = out;
        // Land exactly on the target despite rounding in t + dt.
        if (out.field.t - target).abs() <= 1e-12 * target.abs().max(1.0) {
            out.field.t = target;
        }
        observer(&state, &out);
        steps += 1;
        floored_mass += out.floored_mass;
        floored_cells += out.floored_cells;
        series.push(Diagnostics::compute(&out.field, model, s0, cfg.rho_floor));
        state = out.field;
    }

    Ok(RunOutput {
        snapshots,
        series,
        final_state: state,
        steps,
        s0,
        floored_mass,
        floored_cells,
    })
}
