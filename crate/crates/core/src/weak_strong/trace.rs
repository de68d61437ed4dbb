use serde::Serialize;

use super::ClassicalSolution;
use crate::defects::DefectTrace;
use crate::numerics::{cumulative_trapezoid, sum};
use crate::thermo::{relative_energy_unchecked, CutOff, EssentialWindow, PhasePoint, ThermoModel};
use crate::young::{Result, YoungError, YoungMeasureField};

/// `int <Y_{t,x}; E_Z(. | r, Theta, U)> dx` per slice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelEnergyTrace {
    pub times: Vec<f64>,
    pub value: Vec<f64>,
    /// Samples where `(r, Theta)` left the essential window.
    pub window_exits: usize,
}

/// Relative energy of `ym` against `sol`, with the classical solution
/// sampled at block centres and slice times.
pub fn rel_energy_trace(
    ym: &YoungMeasureField,
    sol: &ClassicalSolution,
    model: &ThermoModel,
    z: &CutOff,
    window: Option<&EssentialWindow>,
) -> Result<RelEnergyTrace> {
    let per_block = ym.observable_at(|t, x, p| {
        relative_energy_unchecked(model, z, p, &sol.eval(t, x).reference())
    })?;
    let vol = ym.block_volume();
    let value = per_block.iter().map(|s| sum(s.iter().copied()) * vol).collect();
    let mut window_exits = 0;
    if let Some(w) = window {
        for s in &ym.slices {
            for b in 0..ym.num_blocks() {
                let c = sol.eval(s.t, ym.block_center(b));
                if !w.contains_reference(c.r, c.theta) {
                    window_exits += 1;
                }
            }
        }
    }
    Ok(RelEnergyTrace { times: ym.times(), value, window_exits })
}

/// Essential window spanning the range of `(r, Theta)` sampled on the
/// measure's space-time blocks.
pub fn classical_window(
    ym: &YoungMeasureField,
    sol: &ClassicalSolution,
    model: &ThermoModel,
) -> crate::thermo::Result<EssentialWindow> {
    let (mut r0, mut r1, mut t0, mut t1) = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
    for s in &ym.slices {
        for b in 0..ym.num_blocks() {
            let c = sol.eval(s.t, ym.block_center(b));
            r0 = r0.min(c.r);
            r1 = r1.max(c.r);
            t0 = t0.min(c.theta);
            t1 = t1.max(c.theta);
        }
    }
    // Widen degenerate (constant) ranges so the window is a box.
    let pad = |lo: f64, hi: f64| if hi > lo { (lo, hi) } else { (lo * 0.99, hi * 1.01) };
    let (r0, r1) = pad(r0, r1);
    let (t0, t1) = pad(t0, t1);
    EssentialWindow::new(model, r0, r1, t0, t1, EssentialWindow::DEFAULT_MARGIN)
}

/// Default cut-off `Z_{a,b}` with `a = min s - 1`, `b = max s + 1` over the
/// initial slice.
pub fn default_cutoff(ym: &YoungMeasureField, model: &ThermoModel) -> Result<CutOff> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for b in &ym.slices[0].blocks {
        for a in &b.atoms {
            if a.point.rho > 0.0 {
                let s = model.entropy_unchecked(a.point.rho, a.point.energy);
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(YoungError::InvalidSpec("initial slice has no finite entropy".into()));
    }
    CutOff::new(lo - 1.0, hi + 1.0).map_err(|e| YoungError::InvalidSpec(e.to_string()))
}

/// Both sides of the relative energy inequality per slice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityResidual {
    pub times: Vec<f64>,
    /// `[int <Y; E(.|r, Theta, U)>]_0^tau + D(tau)`.
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `rhs - lhs`; the inequality holds where this is `>= 0`.
    pub residual: Vec<f64>,
    /// Integrands per slice: entropy transport, `s(r, Theta)` terms,
    /// velocity terms, pressure terms.
    pub integrands: Vec<[f64; 4]>,
    /// `max |grad U|_F * ||mu_R||([0, tau] x Omega)`, the bound used for the
    /// Reynolds-defect pairing.
    pub reynolds_bound: Vec<f64>,
}

impl InequalityResidual {
    pub fn min_residual(&self) -> f64 {
        self.residual.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn rhs_integrand(model: &ThermoModel, z: &CutOff, sol: &ClassicalSolution, t: f64, x: [f64; 3], p: &PhasePoint) -> [f64; 4] {
    let c = sol.eval(t, x);
    let u = c.velocity;
    let rho = p.rho;
    let m = p.momentum;
    let zs = if rho > 0.0 { z.apply(model.entropy_unchecked(rho, p.energy)) } else { 0.0 };
    let s_ref = model.specific_entropy(c.r, c.theta);

    let mut t1 = -rho * zs * c.dtheta[0];
    let mut t2 = rho * s_ref * c.dtheta[0];
    for j in 0..3 {
        t1 -= zs * m[j] * c.dtheta[j + 1];
        t2 += m[j] * s_ref * c.dtheta[j + 1];
    }

    let diff: [f64; 3] = std::array::from_fn(|k| rho * u[k] - m[k]);
    let mut t3 = -model.pressure_from_energy(p.energy) * c.div_velocity();
    for k in 0..3 {
        t3 += diff[k] * c.dvelocity[k][0];
        if rho > 0.0 {
            for j in 0..3 {
                t3 += diff[k] * m[j] / rho * c.dvelocity[k][j + 1];
            }
        }
    }

    let mut t4 = (c.r - rho) / c.r * c.dpressure(0);
    for j in 0..3 {
        t4 -= m[j] / c.r * c.dpressure(j + 1);
    }
    [t1, t2, t3, t4]
}

/// Evaluates `rhs - lhs` of the relative energy inequality on every slice.
///
/// Time integrals use the trapezoidal rule on the slice times; the
/// classical factors are sampled at block centres.
pub fn ws_inequality_residual(
    ym: &YoungMeasureField,
    defects: &DefectTrace,
    sol: &ClassicalSolution,
    model: &ThermoModel,
    z: &CutOff,
) -> Result<InequalityResidual> {
    let times = ym.times();
    if defects.times.len() != times.len() {
        return Err(YoungError::Alignment("defect trace and measure differ in slices".into()));
    }
    let rel = rel_energy_trace(ym, sol, model, &CutOff::identity(), None)?;
    let vol = ym.block_volume();
    let mut integrands = Vec::with_capacity(times.len());
    let mut max_grad = 0.0f64;
    for s in &ym.slices {
        let mut acc = [0.0; 4];
        for (b, m) in s.blocks.iter().enumerate() {
            let x = ym.block_center(b);
            max_grad = max_grad.max(sol.eval(s.t, x).grad_velocity_norm());
            for a in &m.atoms {
                let v = rhs_integrand(model, z, sol, s.t, x, &a.point);
                for k in 0..4 {
                    acc[k] += a.weight * v[k] * vol;
                }
            }
        }
        if acc.iter().any(|v| !v.is_finite()) {
            return Err(YoungError::Observable { slice: integrands.len(), block: 0 });
        }
        integrands.push(acc);
    }
    let total: Vec<f64> = integrands.iter().map(|v| sum(v.iter().copied())).collect();
    let integral = cumulative_trapezoid(&times, &total);
    let reynolds_bound: Vec<f64> = defects.mu_r_cumulative.iter().map(|m| max_grad * m).collect();
    let rhs: Vec<f64> = integral.iter().zip(&reynolds_bound).map(|(a, b)| a + b).collect();
    let lhs: Vec<f64> = rel
        .value
        .iter()
        .zip(&defects.dissipation.d)
        .map(|(e, d)| e - rel.value[0] + d)
        .collect();
    let residual = rhs.iter().zip(&lhs).map(|(r, l)| r - l).collect();
    Ok(InequalityResidual { times, lhs, rhs, residual, integrands, reynolds_bound })
}
