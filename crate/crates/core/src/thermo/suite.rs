//! Sampled invariant suite: Gibbs relation, stability, and coercivity of
//! the relative energy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{coercivity_ratio, log_grid, stability_check, EssentialWindow, PhasePoint, Reference};
use super::{Result, StabilityReport, ThermoModel};

/// Compact box of phase points for the coercivity sweep, in primitive
/// variables: `rho`, `theta` log-uniform and each velocity component
/// uniform in `[-speed, speed]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleBox {
    pub rho: (f64, f64),
    pub theta: (f64, f64),
    pub speed: f64,
}

impl Default for SampleBox {
    fn default() -> Self {
        Self { rho: (0.1, 10.0), theta: (0.1, 10.0), speed: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoercivitySweep {
    pub samples: usize,
    pub min_ratio: f64,
    pub argmin: PhasePoint,
    pub non_positive: usize,
}

/// Minimum of [`coercivity_ratio`] over `samples` seeded draws from `bx`.
pub fn coercivity_sweep(
    model: &ThermoModel,
    win: &EssentialWindow,
    reference: &Reference,
    bx: &SampleBox,
    samples: usize,
    seed: u64,
) -> Result<CoercivitySweep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_uniform = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| rng.random_range(lo.ln()..=hi.ln()).exp();
    let mut out = CoercivitySweep { samples, min_ratio: f64::INFINITY, argmin: PhasePoint::default(), non_positive: 0 };
    for _ in 0..samples {
        let rho = log_uniform(&mut rng, bx.rho);
        let theta = log_uniform(&mut rng, bx.theta);
        let u: [f64; 3] = std::array::from_fn(|_| rng.random_range(-bx.speed..=bx.speed));
        let pt = model.primitive_to_conserved(rho, theta, u)?;
        let ratio = coercivity_ratio(model, win, &pt, reference)?;
        if !(ratio > 0.0) {
            out.non_positive += 1;
        }
        if ratio < out.min_ratio {
            out.min_ratio = ratio;
            out.argmin = pt;
        }
    }
    Ok(out)
}

/// Recorded minimum coercivity ratio of the default sweep for the default
/// model.
pub const COERCIVITY_BASELINE: f64 = 6.9126e-2;

pub const SUITE_SEED: u64 = 20_240_611;
pub const SUITE_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantSuite {
    pub gibbs_max: f64,
    pub gibbs_samples: usize,
    pub stability_min_dp_drho: f64,
    pub stability_min_de_dtheta: f64,
    pub coercivity: CoercivitySweep,
    /// Baseline the sweep is compared against; only recorded for the
    /// default model.
    pub coercivity_baseline: Option<f64>,
    pub pass: bool,
}

/// Default sweep setup: reference `(1, 1, 0)`, window `[0.5, 2]^2`.
pub fn default_coercivity_setup(model: &ThermoModel) -> Result<(EssentialWindow, Reference)> {
    let win = EssentialWindow::new(model, 0.5, 2.0, 0.5, 2.0, EssentialWindow::DEFAULT_MARGIN)?;
    Ok((win, Reference::new(1.0, 1.0, [0.0; 3])))
}

/// Runs the Gibbs check (tolerance `1e-7`, relative step `1e-4`, 50 x 50
/// log grid on `[1e-2, 1e2]^2`), the stability check on the same grid, and
/// the seeded coercivity sweep.
pub fn invariant_suite(model: &ThermoModel) -> Result<InvariantSuite> {
    let grid = log_grid(1e-2, 1e2, 50);
    let mut gibbs_max = 0.0f64;
    for &rho in &grid {
        for &theta in &grid {
            let (r1, r2) = model.gibbs_residual(rho, theta, 1e-4)?;
            gibbs_max = gibbs_max.max(r1.abs()).max(r2.abs());
        }
    }
    let StabilityReport { min_dp_drho, min_de_dtheta, .. } = stability_check(model, &grid, &grid, 1e-4);
    let (win, reference) = default_coercivity_setup(model)?;
    let coercivity = coercivity_sweep(model, &win, &reference, &SampleBox::default(), SUITE_SAMPLES, SUITE_SEED)?;
    let coercivity_baseline = (*model == ThermoModel::default()).then_some(COERCIVITY_BASELINE);
    let pass = gibbs_max <= 1e-7
        && min_dp_drho > 0.0
        && min_de_dtheta > 0.0
        && coercivity.non_positive == 0
        && coercivity_baseline.is_none_or(|b| within_factor_two(coercivity.min_ratio, b));
    Ok(InvariantSuite {
        gibbs_max,
        gibbs_samples: grid.len() * grid.len(),
        stability_min_dp_drho: min_dp_drho,
        stability_min_de_dtheta: min_de_dtheta,
        coercivity,
        coercivity_baseline,
        pass,
    })
}

pub fn within_factor_two(value: f64, baseline: f64) -> bool {
    value >= 0.5 * baseline && value <= 2.0 * baseline
}
