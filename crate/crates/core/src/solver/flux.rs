use serde::{Deserialize, Serialize};

use super::CellState;
use crate::thermo::ThermoModel;

/// Numerical flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxKind {
    /// Local Lax-Friedrichs (Rusanov).
    #[default]
    #[serde(alias = "llf", alias = "local_lax_friedrichs")]
    LocalLaxFriedrichs,
    #[serde(alias = "HLL")]
    Hll,
}

/// Per-cell quantities needed by the fluxes.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CellPrim {
    pub velocity: [f64; 3],
    pub pressure: f64,
    pub sound_speed: f64,
}

impl CellPrim {
    pub fn new(c: &CellState, model: &ThermoModel) -> Self {
        let internal = c.internal_energy().max(0.0);
        let pressure = model.pressure_from_energy(internal);
        let (velocity, theta) = if c.rho > 0.0 {
            (c.velocity(), model.temperature(c.rho, internal))
        } else {
            ([0.0; 3], 0.0)
        };
        Self { velocity, pressure, sound_speed: model.sound_speed(theta) }
    }

    #[inline]
    pub fn max_speed(&self, axis: usize) -> f64 {
        self.velocity[axis].abs() + self.sound_speed
    }
}

/// Wave-speed estimates at one interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Speeds {
    Llf(f64),
    Hll(f64, f64),
}

impl Speeds {
    pub fn at(kind: FluxKind, l: &CellPrim, r: &CellPrim, axis: usize) -> Self {
        match kind {
            FluxKind::LocalLaxFriedrichs => Speeds::Llf(l.max_speed(axis).max(r.max_speed(axis))),
            FluxKind::Hll => {
                let (ul, ur) = (l.velocity[axis], r.velocity[axis]);
                let sl = (ul - l.sound_speed).min(ur - r.sound_speed);
                let sr = (ul + l.sound_speed).max(ur + r.sound_speed);
                Speeds::Hll(sl, sr)
            }
        }
    }

    /// Combines physical fluxes `fl, fr` of a conserved quantity with states
    /// `ql, qr`.
    #[inline]
    pub fn combine<const N: usize>(
        &self,
        fl: [f64; N],
        fr: [f64; N],
        ql: [f64; N],
        qr: [f64; N],
    ) -> [f64; N] {
        let mut out = [0.0; N];
        match *self {
            Speeds::Llf(lambda) => {
                for k in 0..N {
                    out[k] = 0.5 * (fl[k] + fr[k]) - 0.5 * lambda * (qr[k] - ql[k]);
                }
            }
            Speeds::Hll(sl, sr) => {
                if sl >= 0.0 {
                    return fl;
                }
                if sr <= 0.0 {
                    return fr;
                }
                let inv = 1.0 / (sr - sl);
                for k in 0..N {
                    out[k] = (sr * fl[k] - sl * fr[k] + sl * sr * (qr[k] - ql[k])) * inv;
                }
            }
        }
        out
    }
}

/// Physical Euler flux along `axis`.
#[inline]
pub(crate) fn physical_flux(c: &CellState, p: &CellPrim, axis: usize) -> [f64; 5] {
    let un = p.velocity[axis];
    let mut f = [
        c.momentum[axis],
        c.momentum[0] * un,
        c.momentum[1] * un,
        c.momentum[2] * un,
        (c.total_energy + p.pressure) * un,
    ];
    f[1 + axis] += p.pressure;
    f
}

#[inline]
pub(crate) fn numerical_flux(
    kind: FluxKind,
    cl: &CellState,
    pl: &CellPrim,
    cr: &CellState,
    pr: &CellPrim,
    axis: usize,
) -> [f64; 5] {
    Speeds::at(kind, pl, pr, axis).combine(
        physical_flux(cl, pl, axis),
        physical_flux(cr, pr, axis),
        cl.to_array(),
        cr.to_array(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::PhasePoint;

    fn cell(m: &ThermoModel, rho: f64, theta: f64, u: f64) -> CellState {
        let pt: PhasePoint = m.primitive_to_conserved(rho, theta, [u, 0.0, 0.0]).unwrap();
        CellState::from_phase_point(&pt)
    }

    #[test]
    fn consistency() {
        let m = ThermoModel::default();
        let c = cell(&m, 1.3, 0.7, 0.4);
        let p = CellPrim::new(&c, &m);
        for kind in [FluxKind::LocalLaxFriedrichs, FluxKind::Hll] {
            let f = numerical_flux(kind, &c, &p, &c, &p, 0);
            let exact = physical_flux(&c, &p, 0);
            for k in 0..5 {
                assert!((f[k] - exact[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn hll_upwinds_supersonic_flow() {
        let m = ThermoModel::default();
        let l = cell(&m, 1.0, 1.0, 5.0);
        let r = cell(&m, 0.5, 1.0, 5.0);
        let (pl, pr) = (CellPrim::new(&l, &m), CellPrim::new(&r, &m));
        assert_eq!(numerical_flux(FluxKind::Hll, &l, &pl, &r, &pr, 0), physical_flux(&l, &pl, 0));
    }

    #[test]
    fn sound_speed_uses_gamma() {
        let m = ThermoModel::perfect_gas(1.0).unwrap();
        let p = CellPrim::new(&cell(&m, 2.0, 3.0, -1.0), &m);
        assert!((p.sound_speed - 6f64.sqrt()).abs() < 1e-14);
        assert!((p.max_speed(0) - (1.0 + 6f64.sqrt())).abs() < 1e-14);
    }
}
