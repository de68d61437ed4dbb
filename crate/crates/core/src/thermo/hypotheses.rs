//! Sampled checks of the structural hypotheses on the constitutive
//! relations: thermodynamic stability, the pressure growth bound, and the
//! entropy-square growth bound.

use super::ThermoModel;

/// `n` log-uniform points in `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub min_dp_drho: f64,
    pub min_de_dtheta: f64,
    pub samples: usize,
}

impl StabilityReport {
    pub fn holds(&self) -> bool {
        self.min_dp_drho > 0.0 && self.min_de_dtheta > 0.0
    }
}

/// Central-difference estimates of `dp/drho` and `de/dtheta` over the
/// tensor grid `rhos x thetas` (relative step `h`).
pub fn stability_check(model: &ThermoModel, rhos: &[f64], thetas: &[f64], h: f64) -> StabilityReport {
    let mut min_dp = f64::INFINITY;
    let mut min_de = f64::INFINITY;
    for &rho in rhos {
        for &theta in thetas {
            let dr = h * rho;
            let dt = h * theta;
            let dp = (model.pressure(rho + dr, theta) - model.pressure(rho - dr, theta)) / (2.0 * dr);
            let de = (model.specific_energy(rho, theta + dt) - model.specific_energy(rho, theta - dt))
                / (2.0 * dt);
            min_dp = min_dp.min(dp);
            min_de = min_de.min(de);
        }
    }
    StabilityReport {
        min_dp_drho: min_dp,
        min_de_dtheta: min_de,
        samples: rhos.len() * thetas.len(),
    }
}

/// Smallest constant `c` with `lhs <= c * rhs` over the sampled grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstitutiveFit {
    pub c: f64,
    pub argmax: (f64, f64),
}

fn fit<F: Fn(f64, f64) -> (f64, f64)>(rhos: &[f64], thetas: &[f64], f: F) -> ConstitutiveFit {
    let mut best = ConstitutiveFit { c: 0.0, argmax: (f64::NAN, f64::NAN) };
    for &rho in rhos {
        for &theta in thetas {
            let (lhs, rhs) = f(rho, theta);
            let ratio = lhs / rhs;
            if ratio > best.c {
                best = ConstitutiveFit { c: ratio, argmax: (rho, theta) };
            }
        }
    }
    best
}

/// Fitted constant in `|p| <= c (1 + rho + rho|s| + rho e)`.
pub fn hyp_fit(model: &ThermoModel, rhos: &[f64], thetas: &[f64]) -> ConstitutiveFit {
    fit(rhos, thetas, |rho, theta| {
        let p = model.pressure(rho, theta).abs();
        let s = model.specific_entropy(rho, theta);
        (p, 1.0 + rho + rho * s.abs() + rho * model.specific_energy(rho, theta))
    })
}

/// Fitted constant in `rho |s|^2 <= c (1 + rho + rho e)`.
///
/// With `entropy_floor = Some(s_min)` the entropy is replaced by
/// `max(s, s_min)`, a stand-in for an entropy normalized to vanish at zero
/// temperature. Without a floor the perfect-gas entropy is unbounded below
/// and the fitted constant grows with the sampled range.
pub fn c1_fit(
    model: &ThermoModel,
    rhos: &[f64],
    thetas: &[f64],
    entropy_floor: Option<f64>,
) -> ConstitutiveFit {
    fit(rhos, thetas, |rho, theta| {
        let mut s = model.specific_entropy(rho, theta);
        if let Some(floor) = entropy_floor {
            s = s.max(floor);
        }
        (rho * s * s, 1.0 + rho + rho * model.specific_energy(rho, theta))
    })
}
