//! Perfect-gas thermodynamics in the phase variables `(rho, E, m)`.
//!
//! `E` is always the *internal* energy density `rho * e`. The specific
//! entropy is stored in the `(rho, E)` form
//!
//! ```text
//! s(rho, E) = c_v ln E - (c_v + 1) ln rho - c_v ln c_v
//! ```
//!
//! which coincides identically with `c_v ln theta - ln rho` under
//! `E = c_v rho theta`. The additive entropy constant is a convention; all
//! inequalities in the crate are insensitive to it, but every module uses
//! this one normalization.

mod cutoff;
mod hypotheses;
mod relative;
mod suite;

pub use cutoff::CutOff;
pub use hypotheses::{
    c1_fit, hyp_fit, log_grid, stability_check, ConstitutiveFit, StabilityReport,
};
pub(crate) use relative::relative_energy_unchecked;
pub use relative::{coercivity_ratio, essential_split, relative_energy, EssentialWindow, Reference};
pub use suite::{
    coercivity_sweep, default_coercivity_setup, invariant_suite, within_factor_two, CoercivitySweep, InvariantSuite,
    SampleBox, COERCIVITY_BASELINE, SUITE_SAMPLES, SUITE_SEED,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermoError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("vacuum state (rho = 0) has no temperature or velocity")]
    Vacuum,
    #[error("invalid thermodynamic parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, ThermoError>;

/// Equation-of-state variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EosVariant {
    #[default]
    PerfectGas,
    /// `p = (2/3) rho e`, which forces `c_v = 3/2`.
    MonoatomicCaloric,
}

/// Thermodynamic closure: specific heat plus EOS variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoModel {
    c_v: f64,
    variant: EosVariant,
}

impl Default for ThermoModel {
    fn default() -> Self {
        Self {
            c_v: 1.5,
            variant: EosVariant::PerfectGas,
        }
    }
}

/// A point of the phase space `F = {rho >= 0, E >= 0, m in R^d}`.
///
/// Unused momentum components (beyond the grid dimension) are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint {
    pub rho: f64,
    pub energy: f64,
    pub momentum: [f64; 3],
}

/// Primitive state `(rho, theta, u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub theta: f64,
    pub velocity: [f64; 3],
}

#[inline]
pub(crate) fn norm2(v: &[f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

impl PhasePoint {
    pub fn new(rho: f64, energy: f64, momentum: [f64; 3]) -> Result<Self> {
        let pt = Self {
            rho,
            energy,
            momentum,
        };
        pt.validate()?;
        Ok(pt)
    }

    /// Checks `rho >= 0`, `E >= 0`, finiteness, and the vacuum rule.
    pub fn validate(&self) -> Result<()> {
        if !(self.rho >= 0.0) || !self.rho.is_finite() {
            return Err(ThermoError::Domain(format!("rho = {}", self.rho)));
        }
        if !(self.energy >= 0.0) || !self.energy.is_finite() {
            return Err(ThermoError::Domain(format!("E = {}", self.energy)));
        }
        if self.momentum.iter().any(|c| !c.is_finite()) {
            return Err(ThermoError::Domain("non-finite momentum".into()));
        }
        if self.rho == 0.0 && norm2(&self.momentum) != 0.0 {
            return Err(ThermoError::Domain(
                "vacuum point carries momentum".into(),
            ));
        }
        Ok(())
    }

    pub fn is_vacuum(&self) -> bool {
        self.rho == 0.0
    }

    /// `|m|^2 / (2 rho)`: zero on the vacuum with `m = 0`, `+inf` if `m != 0`.
    #[inline]
    pub fn kinetic_energy(&self) -> f64 {
        let m2 = norm2(&self.momentum);
        if self.rho > 0.0 {
            0.5 * m2 / self.rho
        } else if m2 == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Kinetic plus internal energy density.
    #[inline]
    pub fn total_energy(&self) -> f64 {
        self.kinetic_energy() + self.energy
    }

    /// `m_i m_j / rho`, set to zero on the vacuum.
    #[inline]
    pub fn momentum_flux(&self, i: usize, j: usize) -> f64 {
        if self.rho > 0.0 {
            self.momentum[i] * self.momentum[j] / self.rho
        } else {
            0.0
        }
    }

    pub fn as_vec(&self, dim: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 + dim);
        v.push(self.rho);
        v.push(self.energy);
        v.extend_from_slice(&self.momentum[..dim]);
        v
    }
}

impl ThermoModel {
    pub fn new(c_v: f64, variant: EosVariant) -> Result<Self> {
        if !(c_v > 0.0) || !c_v.is_finite() {
            return Err(ThermoError::InvalidParameter(format!(
                "c_v must be positive, got {c_v}"
            )));
        }
        if variant == EosVariant::MonoatomicCaloric && c_v != 1.5 {
            return Err(ThermoError::InvalidParameter(format!(
                "monoatomic caloric EOS requires c_v = 3/2, got {c_v}"
            )));
        }
        Ok(Self { c_v, variant })
    }

    pub fn perfect_gas(c_v: f64) -> Result<Self> {
        Self::new(c_v, EosVariant::PerfectGas)
    }

    pub fn monoatomic() -> Self {
        Self {
            c_v: 1.5,
            variant: EosVariant::MonoatomicCaloric,
        }
    }

    pub fn c_v(&self) -> f64 {
        self.c_v
    }

    pub fn variant(&self) -> EosVariant {
        self.variant
    }

    /// Adiabatic exponent `1 + 1/c_v`.
    pub fn gamma(&self) -> f64 {
        1.0 + 1.0 / self.c_v
    }

    // ---- (rho, theta) constitutive functions -------------------------------

    /// Pressure `p(rho, theta)`.
    #[inline]
    pub fn pressure(&self, rho: f64, theta: f64) -> f64 {
        match self.variant {
            EosVariant::PerfectGas => rho * theta,
            EosVariant::MonoatomicCaloric => 2.0 / 3.0 * rho * self.specific_energy(rho, theta),
        }
    }

    /// Specific internal energy `e(rho, theta) = c_v theta`.
    #[inline]
    pub fn specific_energy(&self, _rho: f64, theta: f64) -> f64 {
        self.c_v * theta
    }

    /// Specific entropy `s(rho, theta) = ln(theta^c_v / rho)`.
    #[inline]
    pub fn specific_entropy(&self, rho: f64, theta: f64) -> f64 {
        self.c_v * theta.ln() - rho.ln()
    }

    /// Sound speed `sqrt(gamma theta)`.
    #[inline]
    pub fn sound_speed(&self, theta: f64) -> f64 {
        (self.gamma() * theta.max(0.0)).sqrt()
    }

    // ---- phase-variable forms ----------------------------------------------

    /// `theta(rho, E) = E / (c_v rho)`; caller guarantees `rho > 0`.
    #[inline]
    pub fn temperature(&self, rho: f64, energy: f64) -> f64 {
        energy / (self.c_v * rho)
    }

    /// Pressure in phase variables, `p = E / c_v`.
    #[inline]
    pub fn pressure_from_energy(&self, energy: f64) -> f64 {
        energy / self.c_v
    }

    /// Entropy in phase variables without domain checks.
    ///
    /// Returns `-inf` for `E = 0 < rho` and `+inf` for `rho = 0 < E`.
    #[inline]
    pub fn entropy_unchecked(&self, rho: f64, energy: f64) -> f64 {
        self.c_v * (energy.ln() - self.c_v.ln()) - (self.c_v + 1.0) * rho.ln()
    }

    pub fn primitive_to_conserved(
        &self,
        rho: f64,
        theta: f64,
        velocity: [f64; 3],
    ) -> Result<PhasePoint> {
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(ThermoError::Domain(format!("rho = {rho}")));
        }
        if rho == 0.0 {
            return Ok(PhasePoint::default());
        }
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(ThermoError::Domain(format!("theta = {theta}")));
        }
        Ok(PhasePoint {
            rho,
            energy: rho * self.specific_energy(rho, theta),
            momentum: velocity.map(|u| rho * u),
        })
    }

    pub fn conserved_to_primitive(&self, pt: &PhasePoint) -> Result<Primitive> {
        if pt.rho == 0.0 {
            return Err(ThermoError::Vacuum);
        }
        pt.validate()?;
        Ok(Primitive {
            rho: pt.rho,
            theta: self.temperature(pt.rho, pt.energy),
            velocity: pt.momentum.map(|m| m / pt.rho),
        })
    }

    /// Specific entropy `s(rho, E)`; requires `rho > 0` and `E > 0`.
    pub fn entropy(&self, pt: &PhasePoint) -> Result<f64> {
        if !(pt.rho > 0.0) || !(pt.energy > 0.0) {
            return Err(ThermoError::Domain(format!(
                "entropy needs rho > 0 and E > 0, got ({}, {})",
                pt.rho, pt.energy
            )));
        }
        Ok(self.entropy_unchecked(pt.rho, pt.energy))
    }

    /// Central-difference residuals of Gibbs' relation at `(rho, theta)`.
    ///
    /// `r1 = theta ds/dtheta - de/dtheta` and
    /// `r2 = theta ds/drho - de/drho - p d(1/rho)/drho`, each divided by the
    /// magnitude of its energy-side term (`de/dtheta` and `p / rho^2`) so
    /// that residuals are comparable across decades of `(rho, theta)`.
    /// Steps are relative: `h * rho` and `h * theta`.
    pub fn gibbs_residual(&self, rho: f64, theta: f64, h: f64) -> Result<(f64, f64)> {
        if !(rho > 0.0 && theta > 0.0) {
            return Err(ThermoError::Domain(format!("(rho, theta) = ({rho}, {theta})")));
        }
        if !(h > 0.0 && h < 0.5) {
            return Err(ThermoError::Domain(format!("step h = {h}")));
        }
        let dr = h * rho;
        let dt = h * theta;
        let ds_dtheta = (self.specific_entropy(rho, theta + dt)
            - self.specific_entropy(rho, theta - dt))
            / (2.0 * dt);
        let de_dtheta = (self.specific_energy(rho, theta + dt)
            - self.specific_energy(rho, theta - dt))
            / (2.0 * dt);
        let ds_drho = (self.specific_entropy(rho + dr, theta)
            - self.specific_entropy(rho - dr, theta))
            / (2.0 * dr);
        let de_drho = (self.specific_energy(rho + dr, theta)
            - self.specific_energy(rho - dr, theta))
            / (2.0 * dr);
        let dvol_drho = (1.0 / (rho + dr) - 1.0 / (rho - dr)) / (2.0 * dr);
        let p = self.pressure(rho, theta);

        let r1 = (theta * ds_dtheta - de_dtheta) / de_dtheta.abs();
        let r2 = (theta * ds_drho - de_drho - p * dvol_drho) / (p / (rho * rho));
        Ok((r1, r2))
    }

    /// Support condition `rho^(1+c_v) <= c_v^(-c_v) exp(-s0) E^c_v`,
    /// evaluated in logarithmic form.
    pub fn min_entropy_bound(&self, s0: f64, pt: &PhasePoint) -> bool {
        if pt.rho == 0.0 {
            return pt.energy >= 0.0;
        }
        if !(pt.energy > 0.0) {
            return false;
        }
        let lhs = (1.0 + self.c_v) * pt.rho.ln();
        let rhs = self.c_v * (pt.energy.ln() - self.c_v.ln()) - s0;
        lhs <= rhs
    }

    /// Ballistic free energy `H_Theta(rho, theta) = rho e - Theta rho s`.
    pub fn ballistic_free_energy(&self, rho: f64, theta: f64, big_theta: f64) -> Result<f64> {
        check_positive(&[("rho", rho), ("theta", theta), ("Theta", big_theta)])?;
        Ok(rho * self.specific_energy(rho, theta)
            - big_theta * rho * self.specific_entropy(rho, theta))
    }

    /// `dH_Theta/drho` at fixed `theta`: `e - Theta (s + rho ds/drho)`.
    pub fn ballistic_free_energy_drho(
        &self,
        rho: f64,
        theta: f64,
        big_theta: f64,
    ) -> Result<f64> {
        check_positive(&[("rho", rho), ("theta", theta), ("Theta", big_theta)])?;
        Ok(self.specific_energy(rho, theta) - big_theta * (self.specific_entropy(rho, theta) - 1.0))
    }
}

fn check_positive(vals: &[(&str, f64)]) -> Result<()> {
    for (name, v) in vals {
        if !(*v > 0.0) || !v.is_finite() {
            return Err(ThermoError::Domain(format!("{name} = {v} must be positive")));
        }
    }
    Ok(())
}
