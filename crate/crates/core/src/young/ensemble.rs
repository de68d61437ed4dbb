use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Result, YoungError, YoungMeasureField};
use crate::solver::{self, ConservedField, Grid, RunOutput, SchemeConfig};
use crate::thermo::ThermoModel;
use crate::weak_strong::ClassicalSolution;

/// Initial data families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Uniform {
        rho: f64,
        theta: f64,
        #[serde(default)]
        velocity: [f64; 3],
    },
    /// Two constant states split at `x_1 = split`, both at rest.
    SodLike {
        #[serde(default = "sod_left")]
        left: [f64; 2],
        #[serde(default = "sod_right")]
        right: [f64; 2],
        #[serde(default = "half")]
        split: f64,
    },
    /// A classical solution sampled at `t = 0`.
    Classical { solution: ClassicalSolution },
    /// A classical solution with `rho` raised by `amplitude` on
    /// `lo <= x_1 < hi`.
    DensityBump {
        solution: ClassicalSolution,
        amplitude: f64,
        lo: f64,
        hi: f64,
    },
}

fn sod_left() -> [f64; 2] {
    [1.0, 1.0]
}
fn sod_right() -> [f64; 2] {
    [0.125, 0.8]
}
fn half() -> f64 {
    0.5
}

impl InitialData {
    pub fn sod() -> Self {
        Self::SodLike { left: sod_left(), right: sod_right(), split: half() }
    }

    /// `(rho, theta, u)` at `x`.
    pub fn primitive(&self, x: [f64; 3]) -> (f64, f64, [f64; 3]) {
        match self {
            Self::Uniform { rho, theta, velocity } => (*rho, *theta, *velocity),
            Self::SodLike { left, right, split } => {
                let s = if x[0] < *split { left } else { right };
                (s[0], s[1], [0.0; 3])
            }
            Self::Classical { solution } => {
                let s = solution.eval(0.0, x);
                (s.r, s.theta, s.velocity)
            }
            Self::DensityBump { solution, amplitude, lo, hi } => {
                let s = solution.eval(0.0, x);
                let bump = if x[0] >= *lo && x[0] < *hi { *amplitude } else { 0.0 };
                (s.r + bump, s.theta, s.velocity)
            }
        }
    }

    pub fn sample(&self, grid: Grid, model: &ThermoModel) -> solver::Result<ConservedField> {
        ConservedField::from_primitive(grid, model, 0.0, |x| self.primitive(x))
    }
}

/// Multiplicative density noise `rho -> rho (1 + amplitude xi)`,
/// `xi ~ U[-1, 1]` per cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub resolutions: Vec<usize>,
    pub dim: usize,
    pub length: f64,
    /// Spatial blocks per axis; `0` means one block per cell.
    pub x_blocks: usize,
    pub t_blocks: usize,
    pub snapshots_per_block: usize,
    pub model: ThermoModel,
    pub scheme: SchemeConfig,
    pub initial: InitialData,
    pub perturbation: Option<Perturbation>,
    pub seed: u64,
    /// Merge tolerance for atom compression; `None` keeps every atom.
    pub compression: Option<f64>,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            resolutions: vec![32, 64, 128, 256],
            dim: 1,
            length: 1.0,
            x_blocks: 8,
            t_blocks: 8,
            snapshots_per_block: 1,
            model: ThermoModel::default(),
            scheme: SchemeConfig::default(),
            initial: InitialData::Classical { solution: ClassicalSolution::contact() },
            perturbation: None,
            seed: 0,
            compression: None,
        }
    }
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.resolutions.len() < 2 {
            return Err(YoungError::InvalidSpec("ensemble needs at least 2 resolutions".into()));
        }
        for &n in &self.resolutions {
            Grid::new(self.dim, n, self.length).map_err(|e| YoungError::InvalidSpec(e.to_string()))?;
            if self.x_blocks != 0 && n % self.x_blocks != 0 {
                return Err(YoungError::InvalidSpec(format!(
                    "resolution {n} is not divisible by x_blocks = {}",
                    self.x_blocks
                )));
            }
        }
        if self.t_blocks == 0 || self.snapshots_per_block == 0 {
            return Err(YoungError::InvalidSpec("t_blocks and snapshots_per_block must be >= 1".into()));
        }
        self.scheme.validate().map_err(|e| YoungError::InvalidSpec(e.to_string()))?;
        if let Some(p) = self.perturbation {
            if !(p.amplitude >= 0.0 && p.amplitude < 1.0) {
                return Err(YoungError::InvalidSpec("perturbation amplitude must lie in [0, 1)".into()));
            }
        }
        if let Some(tol) = self.compression {
            if !(tol > 0.0) {
                return Err(YoungError::InvalidSpec("compression tolerance must be positive".into()));
            }
        }
        Ok(())
    }

    /// Sample times: `0`, then `spb` equispaced times in each time block
    /// ending on the block's right edge.
    pub fn snapshot_times(&self) -> Vec<f64> {
        snapshot_times(self.scheme.t_end, self.t_blocks, self.snapshots_per_block)
    }

    pub fn initial_field(&self, n: usize) -> Result<ConservedField> {
        let grid = Grid::new(self.dim, n, self.length).map_err(|e| YoungError::InvalidSpec(e.to_string()))?;
        let mut field = self.initial.sample(grid, &self.model)?;
        if let Some(p) = self.perturbation {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (n as u64).rotate_left(32));
            for c in field.cells.iter_mut() {
                let f = 1.0 + p.amplitude * rng.random_range(-1.0..=1.0);
                c.rho *= f;
                for m in c.momentum.iter_mut() {
                    *m *= f;
                }
                c.total_energy *= f;
            }
        }
        Ok(field)
    }
}

pub fn snapshot_times(t_end: f64, t_blocks: usize, per_block: usize) -> Vec<f64> {
    let mut times = vec![0.0];
    for k in 0..t_blocks {
        for j in 0..per_block {
            let frac = (k as f64 + (j + 1) as f64 / per_block as f64) / t_blocks as f64;
            times.push(t_end * frac);
        }
    }
    times
}

/// Builds the Young measure from snapshots taken at
/// [`EnsembleSpec::snapshot_times`].
pub fn build_young_measure(spec: &EnsembleSpec, snapshots: &[ConservedField]) -> Result<YoungMeasureField> {
    let times = spec.snapshot_times();
    if snapshots.len() != times.len() {
        return Err(YoungError::Alignment(format!(
            "expected {} snapshots, got {}",
            times.len(),
            snapshots.len()
        )));
    }
    for (s, &t) in snapshots.iter().zip(&times) {
        if (s.t - t).abs() > 1e-12 * t.abs().max(1.0) {
            return Err(YoungError::Alignment(format!("snapshot at t = {} expected at {t}", s.t)));
        }
    }
    let spb = spec.snapshots_per_block;
    let mut groups: Vec<Vec<&ConservedField>> = vec![vec![&snapshots[0]]];
    for chunk in snapshots[1..].chunks(spb) {
        groups.push(chunk.iter().collect());
    }
    let mut ym = YoungMeasureField::from_groups(&groups, spec.x_blocks)?;
    let block = spec.scheme.t_end / spec.t_blocks as f64;
    for s in ym.slices.iter_mut().skip(1) {
        s.duration = block;
    }
    Ok(ym)
}

/// One resolution of an ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub resolution: usize,
    pub run: RunOutput,
    /// Uncompressed measure.
    pub fine: YoungMeasureField,
    /// Compressed measure when compression is enabled, otherwise a copy of
    /// `fine`.
    pub measure: YoungMeasureField,
    /// Total energy of the run at each slice time (slice-averaged).
    pub energy_trace: Vec<f64>,
}

/// Runs every resolution (in parallel) and builds its measures.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<Vec<EnsembleMember>> {
    spec.validate()?;
    let times = spec.snapshot_times();
    spec.resolutions
        .par_iter()
        .map(|&n| {
            let init = spec.initial_field(n)?;
            let run = solver::run(init, &spec.scheme, &spec.model, &times)?;
            let fine = build_young_measure(spec, &run.snapshots)?;
            let measure = match spec.compression {
                Some(tol) => fine.compress(tol),
                None => fine.clone(),
            };
            let spb = spec.snapshots_per_block;
            let mut energy_trace = vec![run.snapshots[0].total_energy()];
            for chunk in run.snapshots[1..].chunks(spb) {
                energy_trace.push(crate::numerics::sum(chunk.iter().map(|f| f.total_energy())) / chunk.len() as f64);
            }
            Ok(EnsembleMember { resolution: n, run, fine, measure, energy_trace })
        })
        .collect()
}
