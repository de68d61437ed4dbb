use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Result, YoungError};
use crate::numerics::CompensatedSum;
use crate::solver::ConservedField;
use crate::thermo::{PhasePoint, ThermoModel};

/// Relative distance below which compression merges two atoms.
pub const DEFAULT_MERGE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: PhasePoint,
    pub weight: f64,
}

/// Finite-atom probability measure on the phase space.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BlockMeasure {
    pub atoms: Vec<Atom>,
}

impl BlockMeasure {
    pub fn dirac(point: PhasePoint) -> Self {
        Self { atoms: vec![Atom { point, weight: 1.0 }] }
    }

    pub fn total_weight(&self) -> f64 {
        crate::numerics::sum(self.atoms.iter().map(|a| a.weight))
    }

    pub fn expect<G: Fn(&PhasePoint) -> f64>(&self, g: G) -> f64 {
        let mut acc = CompensatedSum::new();
        for a in &self.atoms {
            acc.add(a.weight * g(&a.point));
        }
        acc.value()
    }

    /// Greedy clustering: each atom joins the first cluster whose leader is
    /// within `tol * |leader|`, and each cluster is replaced by a single atom
    /// at its weighted mean. Weights and every affine observable are
    /// preserved. Clusters of identical atoms keep the point bit-exact.
    pub fn compressed(&self, tol: f64) -> Self {
        struct Cluster {
            leader: [f64; 5],
            weight: f64,
            sum: [CompensatedSum; 5],
            exact: bool,
        }
        let mut clusters: Vec<Cluster> = Vec::new();
        for a in &self.atoms {
            let q = to_array(&a.point);
            let hit = clusters.iter_mut().find(|c| {
                let lead = norm(&c.leader);
                let d = norm(&std::array::from_fn::<f64, 5, _>(|k| q[k] - c.leader[k]));
                d <= tol * lead
            });
            match hit {
                Some(c) => {
                    c.exact &= q == c.leader;
                    c.weight += a.weight;
                    for k in 0..5 {
                        c.sum[k].add(a.weight * q[k]);
                    }
                }
                None => {
                    let mut sum: [CompensatedSum; 5] = Default::default();
                    for k in 0..5 {
                        sum[k].add(a.weight * q[k]);
                    }
                    clusters.push(Cluster { leader: q, weight: a.weight, sum, exact: true });
                }
            }
        }
        let atoms = clusters
            .into_iter()
            .map(|c| {
                let mean = if c.exact {
                    c.leader
                } else {
                    std::array::from_fn(|k| c.sum[k].value() / c.weight)
                };
                Atom { point: from_array(mean), weight: c.weight }
            })
            .collect();
        Self { atoms }
    }
}

fn to_array(p: &PhasePoint) -> [f64; 5] {
    [p.rho, p.energy, p.momentum[0], p.momentum[1], p.momentum[2]]
}

fn from_array(a: [f64; 5]) -> PhasePoint {
    PhasePoint { rho: a[0], energy: a[1], momentum: [a[2], a[3], a[4]] }
}

fn norm(a: &[f64; 5]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Block measures at one time slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSlice {
    /// Mean of the sample times in the slice.
    pub t: f64,
    /// Length of the time block the slice represents (0 for the initial
    /// slice).
    pub duration: f64,
    pub blocks: Vec<BlockMeasure>,
}

/// Piecewise-constant parameterized measure on a space-time block partition.
///
/// Slice 0 always holds the initial data; the remaining slices are the time
/// blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YoungMeasureField {
    /// Resolution of the runs that generated the measure.
    pub resolution: usize,
    pub dim: usize,
    pub length: f64,
    /// Blocks per axis.
    pub x_blocks: usize,
    pub slices: Vec<TimeSlice>,
    pub compressed: bool,
}

impl YoungMeasureField {
    /// Builds the empirical measure: in every block each cell value at each
    /// time of the group carries weight `1 / (cells x times)`.
    ///
    /// `x_blocks = 0` uses one block per cell.
    pub fn from_groups(groups: &[Vec<&ConservedField>], x_blocks: usize) -> Result<Self> {
        let first = groups
            .first()
            .and_then(|g| g.first())
            .ok_or_else(|| YoungError::Alignment("no snapshots".into()))?;
        let grid = first.grid;
        let n = grid.n();
        let xb = if x_blocks == 0 { n } else { x_blocks };
        if n % xb != 0 {
            return Err(YoungError::InvalidSpec(format!(
                "resolution {n} is not divisible by {xb} blocks per axis"
            )));
        }
        let dim = grid.dim();
        let per = n / xb;
        let cells_per_block = per.pow(dim as u32);
        let num_blocks = xb.pow(dim as u32);

        let mut slices = Vec::with_capacity(groups.len());
        for group in groups {
            if group.is_empty() {
                return Err(YoungError::Alignment("empty time group".into()));
            }
            if group.iter().any(|f| f.grid != grid) {
                return Err(YoungError::Alignment("snapshots on different grids".into()));
            }
            let weight = 1.0 / (cells_per_block * group.len()) as f64;
            let blocks: Vec<BlockMeasure> = (0..num_blocks)
                .into_par_iter()
                .map(|b| {
                    let bidx = multi(b, xb, dim);
                    let mut atoms = Vec::with_capacity(cells_per_block * group.len());
                    for field in group {
                        for c in 0..cells_per_block {
                            let cidx = multi(c, per, dim);
                            let mut idx = [0; 3];
                            for k in 0..dim {
                                idx[k] = bidx[k] * per + cidx[k];
                            }
                            let cell = &field.cells[grid.flat_index(idx)];
                            atoms.push(Atom { point: cell.phase_point(), weight });
                        }
                    }
                    BlockMeasure { atoms }
                })
                .collect();
            let t = crate::numerics::sum(group.iter().map(|f| f.t)) / group.len() as f64;
            slices.push(TimeSlice { t, duration: 0.0, blocks });
        }
        Ok(Self { resolution: n, dim, length: grid.length(), x_blocks: xb, slices, compressed: false })
    }

    /// One Dirac per block and slice, from a point-valued profile.
    pub fn dirac<F>(resolution: usize, dim: usize, length: f64, x_blocks: usize, times: &[f64], f: F) -> Self
    where
        F: Fn(f64, [f64; 3]) -> PhasePoint,
    {
        let mut field = Self {
            resolution,
            dim,
            length,
            x_blocks,
            slices: Vec::new(),
            compressed: false,
        };
        let nb = field.num_blocks();
        field.slices = times
            .iter()
            .enumerate()
            .map(|(k, &t)| TimeSlice {
                t,
                duration: if k == 0 { 0.0 } else { t - times[k - 1] },
                blocks: (0..nb).map(|b| BlockMeasure::dirac(f(t, field.block_center(b)))).collect(),
            })
            .collect();
        field
    }

    pub fn num_blocks(&self) -> usize {
        self.x_blocks.pow(self.dim as u32)
    }

    pub fn block_volume(&self) -> f64 {
        (self.length / self.x_blocks as f64).powi(self.dim as i32)
    }

    pub fn block_center(&self, b: usize) -> [f64; 3] {
        let idx = multi(b, self.x_blocks, self.dim);
        let h = self.length / self.x_blocks as f64;
        let mut x = [0.0; 3];
        for k in 0..self.dim {
            x[k] = (idx[k] as f64 + 0.5) * h;
        }
        x
    }

    pub fn times(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.t).collect()
    }

    /// Compresses every slice; the initial slice only merges identical
    /// atoms so the initial data stay exact.
    pub fn compress(&self, tol: f64) -> Self {
        let slices = self
            .slices
            .iter()
            .enumerate()
            .map(|(k, s)| TimeSlice {
                t: s.t,
                duration: s.duration,
                blocks: {
                    let tol = if k == 0 { 0.0 } else { tol };
                    s.blocks.par_iter().map(|b| b.compressed(tol)).collect()
                },
            })
            .collect();
        Self { slices, compressed: true, ..self.clone() }
    }

    /// `<Y_{t,x}; g>` per slice and block.
    pub fn observable<G>(&self, g: G) -> Result<Vec<Vec<f64>>>
    where
        G: Fn(&PhasePoint) -> f64 + Sync,
    {
        self.observable_at(|_, _, p| g(p))
    }

    /// As [`observable`](Self::observable) with `g(t, x_block, point)`.
    pub fn observable_at<G>(&self, g: G) -> Result<Vec<Vec<f64>>>
    where
        G: Fn(f64, [f64; 3], &PhasePoint) -> f64 + Sync,
    {
        self.slices
            .iter()
            .enumerate()
            .map(|(k, s)| {
                s.blocks
                    .par_iter()
                    .enumerate()
                    .map(|(b, m)| {
                        let x = self.block_center(b);
                        let v = m.expect(|p| g(s.t, x, p));
                        if v.is_finite() {
                            Ok(v)
                        } else {
                            Err(YoungError::Observable { slice: k, block: b })
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// `int_Omega <Y_{t,x}; g> dx` per slice.
    pub fn integrate<G>(&self, g: G) -> Result<Vec<f64>>
    where
        G: Fn(&PhasePoint) -> f64 + Sync,
    {
        let vol = self.block_volume();
        Ok(self
            .observable(g)?
            .into_iter()
            .map(|v| crate::numerics::sum(v) * vol)
            .collect())
    }

    /// JSON lines, one record per block.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (k, s) in self.slices.iter().enumerate() {
            for (b, m) in s.blocks.iter().enumerate() {
                let atoms: Vec<(Vec<f64>, f64)> =
                    m.atoms.iter().map(|a| (a.point.as_vec(self.dim), a.weight)).collect();
                let rec = serde_json::json!({ "t_block": k, "x_block": b, "atoms": atoms });
                out.push_str(&rec.to_string());
                out.push('\n');
            }
        }
        out
    }
}

fn multi(flat: usize, n: usize, dim: usize) -> [usize; 3] {
    let mut idx = [0; 3];
    let mut rem = flat;
    for k in (0..dim).rev() {
        idx[k] = rem % n;
        rem /= n;
    }
    idx
}

/// Location of an atom inside a [`YoungMeasureField`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomRef {
    pub slice: usize,
    pub block: usize,
    pub atom: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SupportReport {
    /// Atoms with `s(rho, E) < s0 - tol`, i.e. outside
    /// `rho^(1+c_v) <= c_v^(-c_v) exp(-s0) E^c_v`.
    pub entropy: Vec<AtomRef>,
    /// Atoms with `rho = 0` but `m != 0`.
    pub vacuum: Vec<AtomRef>,
}

impl SupportReport {
    pub fn is_empty(&self) -> bool {
        self.entropy.is_empty() && self.vacuum.is_empty()
    }
}

pub fn support_check(ym: &YoungMeasureField, model: &ThermoModel, s0: f64, tol: f64) -> SupportReport {
    let mut report = SupportReport::default();
    for (slice, s) in ym.slices.iter().enumerate() {
        for (block, m) in s.blocks.iter().enumerate() {
            for (atom, a) in m.atoms.iter().enumerate() {
                let at = AtomRef { slice, block, atom };
                let p = &a.point;
                if p.rho == 0.0 {
                    if p.momentum.iter().any(|&v| v != 0.0) {
                        report.vacuum.push(at);
                    }
                    continue;
                }
                let s = model.entropy_unchecked(p.rho, p.energy);
                if !(s >= s0 - tol) {
                    report.entropy.push(at);
                }
            }
        }
    }
    report
}
