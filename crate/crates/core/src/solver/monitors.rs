use serde::{Deserialize, Serialize};

use super::ConservedField;
use crate::numerics::CompensatedSum;
use crate::thermo::{norm2, ThermoModel};

/// Slack on `s >= s0` before a cell counts as violating.
pub const ENTROPY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyMonitor {
    pub min_s: f64,
    /// Flat indices with `s < s0 - ENTROPY_TOLERANCE`, equivalently
    /// `rho > exp(-s0) theta^c_v` up to the tolerance.
    pub violated: Vec<usize>,
}

/// Minimum specific entropy over cells with `rho > rho_floor`.
pub fn min_entropy_monitor(
    field: &ConservedField,
    s0: f64,
    model: &ThermoModel,
    rho_floor: f64,
) -> EntropyMonitor {
    let mut min_s = f64::INFINITY;
    let mut violated = Vec::new();
    for (i, c) in field.cells.iter().enumerate() {
        if c.rho <= rho_floor {
            continue;
        }
        let s = model.entropy_unchecked(c.rho, c.internal_energy());
        let s = if s.is_nan() { f64::NEG_INFINITY } else { s };
        min_s = min_s.min(s);
        if s < s0 - ENTROPY_TOLERANCE {
            violated.push(i);
        }
    }
    EntropyMonitor { min_s, violated }
}

/// One row of the solver time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
    pub min_s: f64,
    pub violations: usize,
}

impl Diagnostics {
    pub fn compute(field: &ConservedField, model: &ThermoModel, s0: f64, rho_floor: f64) -> Self {
        let mon = min_entropy_monitor(field, s0, model, rho_floor);
        Self {
            t: field.t,
            mass: field.total_mass(),
            momentum: field.total_momentum(),
            energy: field.total_energy(),
            min_s: mon.min_s,
            violations: mon.violated.len(),
        }
    }
}

/// The a priori functionals `int rho^(1+1/c_v)`, `int rho |ln theta|^q` for
/// `q = 1, 2`, and `int |m|^p` with `p = (2 c_v + 2) / (2 c_v + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriFunctionals {
    pub rho_power: f64,
    pub rho_log_theta: [f64; 2],
    pub momentum_power: f64,
}

impl AprioriFunctionals {
    /// Exponent of the momentum functional.
    pub fn momentum_exponent(model: &ThermoModel) -> f64 {
        let cv = model.c_v();
        (2.0 * cv + 2.0) / (2.0 * cv + 1.0)
    }

    /// Componentwise `self <= other`.
    pub fn dominated_by(&self, other: &Self) -> bool {
        self.rho_power <= other.rho_power
            && self.rho_log_theta[0] <= other.rho_log_theta[0]
            && self.rho_log_theta[1] <= other.rho_log_theta[1]
            && self.momentum_power <= other.momentum_power
    }
}

pub fn apriori_functionals(field: &ConservedField, model: &ThermoModel) -> AprioriFunctionals {
    let gamma = model.gamma();
    let p = AprioriFunctionals::momentum_exponent(model);
    let mut acc = [CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new()];
    for c in &field.cells {
        if c.rho > 0.0 {
            let lt = model.temperature(c.rho, c.internal_energy()).ln().abs();
            acc[0].add(c.rho.powf(gamma));
            acc[1].add(c.rho * lt);
            acc[2].add(c.rho * lt * lt);
        }
        acc[3].add(norm2(&c.momentum).sqrt().powf(p));
    }
    let vol = field.grid.cell_volume();
    AprioriFunctionals {
        rho_power: acc[0].value() * vol,
        rho_log_theta: [acc[1].value() * vol, acc[2].value() * vol],
        momentum_power: acc[3].value() * vol,
    }
}

/// Upper bounds on the a priori functionals for any state with `s >= s0`
/// everywhere and total energy at most `energy` on a domain of volume
/// `volume`.
///
/// `s >= s0` gives `rho <= exp(-s0) theta^c_v`, hence
/// `rho^(1+1/c_v) <= exp(-s0/c_v) E / c_v`; the logarithmic moments split at
/// `theta = 1`; the momentum bound is Hölder with `|m|^2 / rho <= 2 E_total`.
pub fn apriori_bounds(model: &ThermoModel, s0: f64, energy: f64, volume: f64) -> AprioriFunctionals {
    let cv = model.c_v();
    let rho_power = (-s0 / cv).exp() * energy / cv;
    let log_bound = |q: f64| {
        volume * (-s0).exp() * (q / (cv * std::f64::consts::E)).powf(q)
            + (q / std::f64::consts::E).powf(q) * energy / cv
    };
    let p = AprioriFunctionals::momentum_exponent(model);
    let momentum_power = (2.0 * energy).powf(p / 2.0) * rho_power.powf(1.0 - p / 2.0);
    AprioriFunctionals {
        rho_power,
        rho_log_theta: [log_bound(1.0), log_bound(2.0)],
        momentum_power,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Grid;

    #[test]
    fn monitor_flags_low_entropy_cells() {
        let m = ThermoModel::default();
        let g = Grid::unit(1, 8).unwrap();
        // s = c_v ln theta - ln rho; cells with theta < 1 have s < 0 at rho = 1.
        let f = ConservedField::from_primitive(g, &m, 0.0, |x| {
            (1.0, if x[0] < 0.5 { 0.5 } else { 2.0 }, [0.0; 3])
        })
        .unwrap();
        let mon = min_entropy_monitor(&f, 0.0, &m, 1e-12);
        assert_eq!(mon.violated, vec![0, 1, 2, 3]);
        assert!((mon.min_s - 1.5 * 0.5f64.ln()).abs() < 1e-14);
        let at_min = min_entropy_monitor(&f, mon.min_s, &m, 1e-12);
        assert!(at_min.violated.is_empty());
    }

    #[test]
    fn floored_cells_are_excluded() {
        let m = ThermoModel::default();
        let g = Grid::unit(1, 4).unwrap();
        let mut f = ConservedField::uniform(g, &m, 1.0, 1.0, [0.0; 3]).unwrap();
        f.cells[2].rho = 1e-12;
        f.cells[2].total_energy = 1e-30;
        let mon = min_entropy_monitor(&f, 0.0, &m, 1e-12);
        assert!(mon.violated.is_empty());
        assert_eq!(mon.min_s, m.specific_entropy(1.0, 1.0));
    }

    #[test]
    fn uniform_state_satisfies_bounds() {
        let m = ThermoModel::default();
        let g = Grid::unit(2, 8).unwrap();
        let f = ConservedField::uniform(g, &m, 0.8, 2.5, [0.3, -0.4, 0.0]).unwrap();
        let s0 = min_entropy_monitor(&f, 0.0, &m, 0.0).min_s;
        let a = apriori_functionals(&f, &m);
        let b = apriori_bounds(&m, s0, f.total_energy(), 1.0);
        assert!(a.dominated_by(&b), "{a:?} vs {b:?}");
        assert!((a.rho_power - 0.8f64.powf(m.gamma())).abs() < 1e-14);
    }

    #[test]
    fn momentum_exponent_matches_density_power() {
        for cv in [1.0, 1.5, 2.5, 7.0] {
            let m = ThermoModel::perfect_gas(cv).unwrap();
            let p = AprioriFunctionals::momentum_exponent(&m);
            assert!((p / (2.0 - p) - m.gamma()).abs() < 1e-14);
        }
    }
}
