//! Dissipation and concentration defects of empirical measures, and the
//! domination of the latter by the former.

use rand::Rng;
use serde::Serialize;

use crate::numerics::sum;
use crate::thermo::{PhasePoint, ThermoModel};
use crate::young::{Atom, BlockMeasure, Result, YoungError, YoungMeasureField};

/// Energy density `|m|^2 / (2 rho) + E`.
pub fn energy_density(p: &PhasePoint) -> f64 {
    p.kinetic_energy() + p.energy
}

/// Dissipation defect `D(tau) = E_Y(0) - E_Y(tau)` with
/// `E_Y = int <Y; |m|^2/(2 rho) + E>`, so that
/// `[E_Y]_0^tau + D(tau) = 0` holds by construction.
///
/// `D_scheme = E_ref(0) - E_ref(tau)` is the energy lost by the generating
/// run and `D_oscillation = D - D_scheme` the part lost to averaging.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissipationDefect {
    pub energy_measure: Vec<f64>,
    pub d: Vec<f64>,
    pub d_oscillation: Vec<f64>,
    pub d_scheme: Vec<f64>,
}

pub fn dissipation_defect(ym: &YoungMeasureField, energy_reference: &[f64]) -> Result<DissipationDefect> {
    if energy_reference.len() != ym.slices.len() {
        return Err(YoungError::Alignment(format!(
            "energy trace has {} entries for {} slices",
            energy_reference.len(),
            ym.slices.len()
        )));
    }
    let energy_measure = ym.integrate(energy_density)?;
    let d: Vec<f64> = energy_measure.iter().map(|e| energy_measure[0] - e).collect();
    let d_scheme: Vec<f64> = energy_reference.iter().map(|e| energy_reference[0] - e).collect();
    let d_oscillation = d.iter().zip(&d_scheme).map(|(a, b)| a - b).collect();
    Ok(DissipationDefect { energy_measure, d, d_oscillation, d_scheme })
}

/// `mu_G` per slice and block: the average of `g` under `fine` minus its
/// average under `ym`. Both measures must share the block layout.
pub fn concentration_defect<G>(ym: &YoungMeasureField, fine: &YoungMeasureField, g: G) -> Result<Vec<Vec<f64>>>
where
    G: Fn(&PhasePoint) -> f64 + Sync,
{
    check_layout(ym, fine)?;
    let a = fine.observable(&g)?;
    let b = ym.observable(&g)?;
    Ok(a.into_iter()
        .zip(b)
        .map(|(fa, fb)| fa.into_iter().zip(fb).map(|(x, y)| x - y).collect())
        .collect())
}

fn check_layout(a: &YoungMeasureField, b: &YoungMeasureField) -> Result<()> {
    if a.dim != b.dim || a.x_blocks != b.x_blocks || a.slices.len() != b.slices.len() {
        return Err(YoungError::Alignment("measures have different block layouts".into()));
    }
    Ok(())
}

/// Concentration defects of the Reynolds-stress entries, the pressure and
/// the energy on one block.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BlockDefect {
    /// `mu` of `m_i m_j / rho`.
    pub momentum_flux: [[f64; 3]; 3],
    pub pressure: f64,
    /// `mu` of `|m|^2/(2 rho) + E`.
    pub energy: f64,
    /// `<fine; |m|^2/(2 rho) + E>`, the scale for roundoff tolerances.
    pub scale: f64,
}

impl BlockDefect {
    /// `mu_R = mu_{m (x) m / rho} + mu_p I`.
    pub fn reynolds(&self) -> [[f64; 3]; 3] {
        let mut r = self.momentum_flux;
        for (i, row) in r.iter_mut().enumerate() {
            row[i] += self.pressure;
        }
        r
    }

    pub fn reynolds_norm(&self) -> f64 {
        self.reynolds().iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// [`Self::reynolds_norm`], set to zero at roundoff level
    /// (`<= DOMINATION_TOLERANCE * scale`).
    pub fn resolved_reynolds_norm(&self) -> f64 {
        let n = self.reynolds_norm();
        if n <= DOMINATION_TOLERANCE * self.scale {
            0.0
        } else {
            n
        }
    }
}

fn block_moments(m: &BlockMeasure, model: &ThermoModel) -> ([[f64; 3]; 3], f64, f64) {
    let mut mm = [[0.0; 3]; 3];
    for (i, row) in mm.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m.expect(|p| p.momentum_flux(i, j));
        }
    }
    (mm, m.expect(|p| model.pressure_from_energy(p.energy)), m.expect(energy_density))
}

pub fn block_defects(
    ym: &YoungMeasureField,
    fine: &YoungMeasureField,
    model: &ThermoModel,
) -> Result<Vec<Vec<BlockDefect>>> {
    check_layout(ym, fine)?;
    Ok(ym
        .slices
        .iter()
        .zip(&fine.slices)
        .map(|(s, f)| {
            s.blocks
                .iter()
                .zip(&f.blocks)
                .map(|(coarse, fine)| {
                    let (mc, pc, ec) = block_moments(coarse, model);
                    let (mf, pf, ef) = block_moments(fine, model);
                    let momentum_flux = std::array::from_fn(|i| std::array::from_fn(|j| mf[i][j] - mc[i][j]));
                    BlockDefect { momentum_flux, pressure: pf - pc, energy: ef - ec, scale: ef.abs() }
                })
                .collect()
        })
        .collect())
}

/// Defect time series of one ensemble member.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectTrace {
    pub times: Vec<f64>,
    pub durations: Vec<f64>,
    pub dissipation: DissipationDefect,
    /// `sum_blocks |mu_R(block)|_F` per slice, ignoring roundoff-level
    /// blocks.
    pub mu_r_norm: Vec<f64>,
    /// `||mu_R||([0, tau] x Omega)`.
    pub mu_r_cumulative: Vec<f64>,
    /// `int_0^tau D(t) dt`.
    pub d_integral: Vec<f64>,
    /// Running maximum of `mu_r_cumulative / d_integral`.
    pub c_fit_running: Vec<f64>,
}

impl DefectTrace {
    pub fn c_fit(&self) -> f64 {
        self.c_fit_running.last().copied().unwrap_or(0.0)
    }
}

pub fn defect_trace(
    ym: &YoungMeasureField,
    fine: &YoungMeasureField,
    energy_reference: &[f64],
    model: &ThermoModel,
) -> Result<(DefectTrace, Vec<Vec<BlockDefect>>)> {
    let dissipation = dissipation_defect(ym, energy_reference)?;
    let defects = block_defects(ym, fine, model)?;
    let vol = ym.block_volume();
    let mu_r_norm: Vec<f64> = defects
        .iter()
        .map(|s| sum(s.iter().map(BlockDefect::resolved_reynolds_norm)) * vol)
        .collect();
    let durations: Vec<f64> = ym.slices.iter().map(|s| s.duration).collect();
    let (mut cum_mu, mut cum_d, mut c_run) = (0.0, 0.0, 0.0f64);
    let (mut mu_r_cumulative, mut d_integral, mut c_fit_running) = (vec![], vec![], vec![]);
    for k in 0..durations.len() {
        cum_mu += mu_r_norm[k] * durations[k];
        cum_d += dissipation.d[k] * durations[k];
        let ratio = if cum_mu == 0.0 {
            0.0
        } else if cum_d > 0.0 {
            cum_mu / cum_d
        } else {
            f64::INFINITY
        };
        c_run = c_run.max(ratio);
        mu_r_cumulative.push(cum_mu);
        d_integral.push(cum_d);
        c_fit_running.push(c_run);
    }
    let trace = DefectTrace {
        times: ym.times(),
        durations,
        dissipation,
        mu_r_norm,
        mu_r_cumulative,
        d_integral,
        c_fit_running,
    };
    Ok((trace, defects))
}

/// Blocks where `|mu_G| <= C_G mu_F` fails, with `C = 2` for the entries of
/// `m (x) m / rho` and `C = 1 / c_v` for the pressure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationReport {
    pub holds: bool,
    pub violations: Vec<(usize, usize, &'static str)>,
    pub c_fit: f64,
}

/// Relative roundoff allowance in [`domination_check`].
pub const DOMINATION_TOLERANCE: f64 = 1e-13;

pub fn domination_check(trace: &DefectTrace, defects: &[Vec<BlockDefect>], model: &ThermoModel) -> DominationReport {
    let mut violations = Vec::new();
    for (k, slice) in defects.iter().enumerate() {
        for (b, d) in slice.iter().enumerate() {
            let tol = DOMINATION_TOLERANCE * d.scale;
            let f = d.energy;
            if d.momentum_flux.iter().flatten().any(|v| v.abs() > 2.0 * f + tol) {
                violations.push((k, b, "momentum_flux"));
            }
            if d.pressure.abs() > f / model.c_v() + tol {
                violations.push((k, b, "pressure"));
            }
        }
    }
    let c_fit = trace.c_fit();
    DominationReport { holds: violations.is_empty() && c_fit.is_finite(), violations, c_fit }
}

/// A synthetic limit object: a Young measure plus concentration atoms
/// `(direction V, mass c)`, standing for the weak-* limit of
/// `sum_i w_i delta_{U_i} + sum_j c_j eps^{-1} delta_{V_j / eps}`-type
/// sequences. For a 1-homogeneous `G` the limit of `G(U_eps)` is
/// `<Y; G> + sum_j c_j G(V_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMeasure {
    pub young: BlockMeasure,
    pub concentration: Vec<Atom>,
}

impl SyntheticMeasure {
    /// Random measure with `atoms` Young atoms and `spikes` concentration
    /// atoms, `rho > 0` throughout.
    pub fn random<R: Rng>(rng: &mut R, atoms: usize, spikes: usize) -> Self {
        let point = |rng: &mut R| {
            let rho = 10f64.powf(rng.random_range(-2.0..2.0));
            let energy = 10f64.powf(rng.random_range(-2.0..2.0));
            let momentum = std::array::from_fn(|_| rng.random_range(-5.0..5.0) * rho);
            PhasePoint { rho, energy, momentum }
        };
        let raw: Vec<f64> = (0..atoms).map(|_| rng.random_range(0.1..1.0)).collect();
        let total = sum(raw.iter().copied());
        let young = BlockMeasure {
            atoms: raw.iter().map(|w| Atom { point: point(rng), weight: w / total }).collect(),
        };
        let concentration = (0..spikes)
            .map(|_| Atom { point: point(rng), weight: rng.random_range(0.0..0.5) })
            .collect();
        Self { young, concentration }
    }

    /// `mu_G = sum_j c_j G(V_j)`.
    pub fn defect<G: Fn(&PhasePoint) -> f64>(&self, g: G) -> f64 {
        sum(self.concentration.iter().map(|a| a.weight * g(&a.point)))
    }

    /// Weak-* limit of `G(U_eps)`.
    pub fn limit<G: Fn(&PhasePoint) -> f64>(&self, g: G) -> f64 {
        self.young.expect(&g) + self.defect(&g)
    }
}

/// `(name, G, C)` with `|G| <= C F`.
pub type Observable = (String, Box<dyn Fn(&PhasePoint) -> f64>, f64);

/// The 1-homogeneous observables dominated by the energy.
pub fn dominated_observables(model: &ThermoModel) -> Vec<Observable> {
    let mut out: Vec<Observable> = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            out.push((format!("m{i}m{j}/rho"), Box::new(move |p: &PhasePoint| p.momentum_flux(i, j)), 2.0));
        }
    }
    let m = *model;
    out.push(("p".into(), Box::new(move |p: &PhasePoint| m.pressure_from_energy(p.energy)), 1.0 / model.c_v()));
    out.push(("E".into(), Box::new(|p: &PhasePoint| p.energy), 1.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::SchemeConfig;
    use crate::young::{run_ensemble, EnsembleSpec, InitialData};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn constant_spec() -> EnsembleSpec {
        EnsembleSpec {
            resolutions: vec![16, 32],
            initial: InitialData::Uniform { rho: 1.0, theta: 1.0, velocity: [0.3, 0.0, 0.0] },
            scheme: SchemeConfig { t_end: 0.1, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn constant_ensemble_has_no_defects() {
        let model = ThermoModel::default();
        for m in run_ensemble(&constant_spec()).unwrap() {
            let (trace, defects) = defect_trace(&m.measure, &m.fine, &m.energy_trace, &model).unwrap();
            for k in 0..trace.times.len() {
                assert!(trace.dissipation.d[k].abs() <= 1e-12);
                assert_eq!(trace.mu_r_norm[k], 0.0);
            }
            assert!(trace.d_integral.last().unwrap().abs() <= 1e-12);
            let rep = domination_check(&trace, &defects, &model);
            assert!(rep.holds && rep.c_fit == 0.0);
        }
    }

    #[test]
    fn uncompressed_measure_has_zero_concentration() {
        let spec = EnsembleSpec {
            resolutions: vec![32, 64],
            initial: InitialData::sod(),
            scheme: SchemeConfig { t_end: 0.1, ..Default::default() },
            ..Default::default()
        };
        for m in run_ensemble(&spec).unwrap() {
            let mu = concentration_defect(&m.measure, &m.fine, |p| p.momentum_flux(0, 0)).unwrap();
            assert!(mu.iter().flatten().all(|&v| v == 0.0));
            let one = concentration_defect(&m.fine.compress(1e-2), &m.fine, |_| 1.0).unwrap();
            assert!(one.iter().flatten().all(|&v| v.abs() < 1e-15));
        }
    }

    #[test]
    fn compression_gap_is_dominated() {
        let model = ThermoModel::default();
        let spec = EnsembleSpec {
            resolutions: vec![64, 128],
            initial: InitialData::sod(),
            scheme: SchemeConfig { t_end: 0.15, ..Default::default() },
            compression: Some(5e-2),
            ..Default::default()
        };
        for m in run_ensemble(&spec).unwrap() {
            let (trace, defects) = defect_trace(&m.measure, &m.fine, &m.energy_trace, &model).unwrap();
            // Jensen: merging into the mean can only lose kinetic energy.
            for k in 0..trace.times.len() {
                assert!(trace.dissipation.d_oscillation[k] >= -1e-13);
                let balance = trace.dissipation.energy_measure[k] - trace.dissipation.energy_measure[0]
                    + trace.dissipation.d[k];
                assert!(balance.abs() <= 1e-10 * trace.dissipation.energy_measure[0]);
            }
            assert!(*trace.mu_r_cumulative.last().unwrap() > 0.0);
            let rep = domination_check(&trace, &defects, &model);
            assert!(rep.holds, "{rep:?}");
            assert!(rep.c_fit.is_finite() && rep.c_fit > 0.0);
        }
    }

    #[test]
    fn two_atom_domination_by_hand() {
        // Young part delta_(1, 1, 0); one spike with V = (2, 1, (2, 0, 0)), mass 0.25.
        let model = ThermoModel::default();
        let sm = SyntheticMeasure {
            young: BlockMeasure::dirac(PhasePoint { rho: 1.0, energy: 1.0, momentum: [0.0; 3] }),
            concentration: vec![Atom {
                point: PhasePoint { rho: 2.0, energy: 1.0, momentum: [2.0, 0.0, 0.0] },
                weight: 0.25,
            }],
        };
        // m1^2/rho = 2, F = 1 + 1 = 2.
        assert_eq!(sm.defect(|p| p.momentum_flux(0, 0)), 0.5);
        assert_eq!(sm.defect(energy_density), 0.5);
        assert!(sm.defect(|p| p.momentum_flux(0, 0)) <= 2.0 * sm.defect(energy_density));
        assert!((sm.defect(|p| model.pressure_from_energy(p.energy)) - 0.25 / 1.5).abs() < 1e-16);
    }

    #[test]
    fn random_measures_satisfy_lemma() {
        let model = ThermoModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let obs = dominated_observables(&model);
        for _ in 0..200 {
            let sm = SyntheticMeasure::random(&mut rng, 5, 3);
            let mu_f = sm.defect(energy_density);
            for (name, g, c) in &obs {
                let direct = sm.defect(g);
                assert!(direct.abs() <= c * mu_f, "{name}: {direct} vs {mu_f}");
                let via_limit = sm.limit(g) - sm.young.expect(g);
                assert!((via_limit - direct).abs() <= 1e-12 * (1.0 + sm.limit(energy_density)));
            }
        }
    }
}
