use serde::{Deserialize, Serialize};

use super::{Grid, Result, SolverError};
use crate::numerics::CompensatedSum;
use crate::thermo::{norm2, PhasePoint, ThermoModel};

/// Cell-averaged conserved state `(rho, m, E_total)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CellState {
    pub rho: f64,
    pub momentum: [f64; 3],
    pub total_energy: f64,
}

impl CellState {
    #[inline]
    pub fn kinetic_energy(&self) -> f64 {
        if self.rho > 0.0 {
            0.5 * norm2(&self.momentum) / self.rho
        } else {
            0.0
        }
    }

    #[inline]
    pub fn internal_energy(&self) -> f64 {
        self.total_energy - self.kinetic_energy()
    }

    #[inline]
    pub fn velocity(&self) -> [f64; 3] {
        self.momentum.map(|m| m / self.rho)
    }

    /// Phase-space point `(rho, E_internal, m)`.
    #[inline]
    pub fn phase_point(&self) -> PhasePoint {
        PhasePoint {
            rho: self.rho,
            energy: self.internal_energy(),
            momentum: self.momentum,
        }
    }

    #[inline]
    pub fn from_phase_point(pt: &PhasePoint) -> Self {
        Self {
            rho: pt.rho,
            momentum: pt.momentum,
            total_energy: pt.total_energy(),
        }
    }

    #[inline]
    pub(crate) fn to_array(self) -> [f64; 5] {
        [self.rho, self.momentum[0], self.momentum[1], self.momentum[2], self.total_energy]
    }

    #[inline]
    pub(crate) fn from_array(a: [f64; 5]) -> Self {
        Self { rho: a[0], momentum: [a[1], a[2], a[3]], total_energy: a[4] }
    }
}

/// Snapshot of the conserved variables on a grid at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservedField {
    pub grid: Grid,
    pub t: f64,
    pub cells: Vec<CellState>,
}

impl ConservedField {
    pub fn new(grid: Grid, t: f64, cells: Vec<CellState>) -> Result<Self> {
        if cells.len() != grid.num_cells() {
            return Err(SolverError::Domain(format!(
                "expected {} cells, got {}",
                grid.num_cells(),
                cells.len()
            )));
        }
        Ok(Self { grid, t, cells })
    }

    /// Samples `(rho, theta, u)` at cell centres (midpoint rule for the cell
    /// averages).
    pub fn from_primitive<F>(grid: Grid, model: &ThermoModel, t: f64, profile: F) -> Result<Self>
    where
        F: Fn([f64; 3]) -> (f64, f64, [f64; 3]),
    {
        let mut cells = Vec::with_capacity(grid.num_cells());
        for flat in 0..grid.num_cells() {
            let x = grid.center(flat);
            let (rho, theta, u) = profile(x);
            if !(rho > 0.0) || !(theta > 0.0) {
                return Err(SolverError::Domain(format!(
                    "initial data must be positive: rho = {rho}, theta = {theta} at {x:?}"
                )));
            }
            let mut u = u;
            for c in u.iter_mut().skip(grid.dim()) {
                *c = 0.0;
            }
            let pt = model.primitive_to_conserved(rho, theta, u)?;
            cells.push(CellState::from_phase_point(&pt));
        }
        Ok(Self { grid, t, cells })
    }

    /// Uniform state.
    pub fn uniform(grid: Grid, model: &ThermoModel, rho: f64, theta: f64, u: [f64; 3]) -> Result<Self> {
        Self::from_primitive(grid, model, 0.0, |_| (rho, theta, u))
    }

    pub fn phase_points(&self) -> impl Iterator<Item = PhasePoint> + '_ {
        self.cells.iter().map(CellState::phase_point)
    }

    /// `sum_i f(cell_i) * |cell|` in flat-index order.
    pub fn integrate<F: Fn(&CellState) -> f64>(&self, f: F) -> f64 {
        let mut acc = CompensatedSum::new();
        for c in &self.cells {
            acc.add(f(c));
        }
        acc.value() * self.grid.cell_volume()
    }

    pub fn total_mass(&self) -> f64 {
        self.integrate(|c| c.rho)
    }

    pub fn total_momentum(&self) -> [f64; 3] {
        [0, 1, 2].map(|k| self.integrate(|c| c.momentum[k]))
    }

    pub fn total_energy(&self) -> f64 {
        self.integrate(|c| c.total_energy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_totals() {
        let m = ThermoModel::default();
        let f = ConservedField::uniform(Grid::unit(1, 16).unwrap(), &m, 1.0, 1.0, [0.0; 3]).unwrap();
        assert_eq!(f.total_mass(), 1.0);
        assert_eq!(f.total_energy(), m.c_v());
    }

    #[test]
    fn sine_density_integrates_to_mean() {
        let m = ThermoModel::default();
        let g = Grid::unit(1, 64).unwrap();
        let f = ConservedField::from_primitive(g, &m, 0.0, |x| {
            (1.0 + 0.2 * (2.0 * std::f64::consts::PI * x[0]).sin(), 1.0, [0.0; 3])
        })
        .unwrap();
        assert!((f.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_data() {
        let m = ThermoModel::default();
        let g = Grid::unit(1, 8).unwrap();
        assert!(ConservedField::from_primitive(g, &m, 0.0, |x| (x[0] - 0.5, 1.0, [0.0; 3])).is_err());
        assert!(ConservedField::uniform(g, &m, 1.0, 0.0, [0.0; 3]).is_err());
    }

    #[test]
    fn galilean_shift_of_momentum() {
        let m = ThermoModel::default();
        let g = Grid::unit(1, 32).unwrap();
        let rho = |x: [f64; 3]| 1.0 + 0.3 * (2.0 * std::f64::consts::PI * x[0]).cos();
        let a = ConservedField::from_primitive(g, &m, 0.0, |x| (rho(x), 1.0, [0.2, 0.0, 0.0])).unwrap();
        let b = ConservedField::from_primitive(g, &m, 0.0, |x| (rho(x), 1.0, [0.7, 0.0, 0.0])).unwrap();
        for (ca, cb) in a.cells.iter().zip(&b.cells) {
            assert!((cb.momentum[0] - ca.momentum[0] - ca.rho * 0.5).abs() < 1e-14);
        }
        assert_eq!(a.total_mass(), b.total_mass());
    }
}
