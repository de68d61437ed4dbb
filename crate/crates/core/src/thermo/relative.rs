//! Relative energy with respect to a smooth reference trio `(r, Theta, U)`,
//! the essential/residual splitting, and the coercivity ratio.

use serde::{Deserialize, Serialize};

use super::{check_positive, norm2, CutOff, PhasePoint, Result, ThermoError, ThermoModel};
use crate::numerics::smoothstep5;

/// Reference trio `(r, Theta, U)` at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub r: f64,
    pub theta: f64,
    pub velocity: [f64; 3],
}

impl Reference {
    pub fn new(r: f64, theta: f64, velocity: [f64; 3]) -> Self {
        Self { r, theta, velocity }
    }
}

/// `E_Z(rho, E, m | r, Theta, U)`.
///
/// With `z` the identity this is the Bregman distance of the convex map
/// `(rho, E, m) -> |m|^2/(2 rho) + E - Theta rho s(rho, E)` to its
/// linearization at the reference point.
pub fn relative_energy(
    model: &ThermoModel,
    z: &CutOff,
    pt: &PhasePoint,
    reference: &Reference,
) -> Result<f64> {
    pt.validate()?;
    check_positive(&[("r", reference.r), ("Theta", reference.theta)])?;
    Ok(relative_energy_unchecked(model, z, pt, reference))
}

/// As [`relative_energy`], skipping validation. Used in hot loops over
/// atoms that were validated at construction.
pub(crate) fn relative_energy_unchecked(
    model: &ThermoModel,
    z: &CutOff,
    pt: &PhasePoint,
    reference: &Reference,
) -> f64 {
    let Reference { r, theta: big, velocity: u } = *reference;
    let (kinetic, rho_z) = if pt.rho > 0.0 {
        let dm = [
            pt.momentum[0] - pt.rho * u[0],
            pt.momentum[1] - pt.rho * u[1],
            pt.momentum[2] - pt.rho * u[2],
        ];
        let s = model.entropy_unchecked(pt.rho, pt.energy);
        (0.5 * norm2(&dm) / pt.rho, pt.rho * z.apply(s))
    } else {
        (0.0, 0.0)
    };
    let h = r * model.specific_energy(r, big) - big * r * model.specific_entropy(r, big);
    let dh = model.specific_energy(r, big) - big * (model.specific_entropy(r, big) - 1.0);
    kinetic + pt.energy - big * rho_z - dh * (pt.rho - r) - h
}

/// Smooth cut-off `Phi(rho, E)` equal to one on the image of the box
/// `[rho_min, rho_max] x [theta_min, theta_max]` and vanishing outside a
/// neighbourhood inflated by the relative `margin`.
///
/// The profile is a tensor product of quintic smoothsteps in `ln rho` and
/// `ln E`; it is one on the bounding box
/// `[rho_min, rho_max] x [c_v rho_min theta_min, c_v rho_max theta_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EssentialWindow {
    pub rho_min: f64,
    pub rho_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub margin: f64,
    energy_min: f64,
    energy_max: f64,
}

impl EssentialWindow {
    pub const DEFAULT_MARGIN: f64 = 0.25;

    pub fn new(
        model: &ThermoModel,
        rho_min: f64,
        rho_max: f64,
        theta_min: f64,
        theta_max: f64,
        margin: f64,
    ) -> Result<Self> {
        check_positive(&[
            ("rho_min", rho_min),
            ("theta_min", theta_min),
            ("margin", margin),
        ])?;
        if !(rho_min < rho_max) || !(theta_min < theta_max) {
            return Err(ThermoError::InvalidParameter(
                "essential window needs min < max".into(),
            ));
        }
        Ok(Self {
            rho_min,
            rho_max,
            theta_min,
            theta_max,
            margin,
            energy_min: rho_min * model.specific_energy(rho_min, theta_min),
            energy_max: rho_max * model.specific_energy(rho_max, theta_max),
        })
    }

    /// Whether `(r, Theta)` lies in the compact set `K`.
    pub fn contains_reference(&self, r: f64, theta: f64) -> bool {
        (self.rho_min..=self.rho_max).contains(&r) && (self.theta_min..=self.theta_max).contains(&theta)
    }

    fn bump(&self, x: f64, lo: f64, hi: f64) -> f64 {
        let w = self.margin.ln_1p();
        if x < lo {
            smoothstep5((x - (lo - w)) / w)
        } else if x > hi {
            smoothstep5(((hi + w) - x) / w)
        } else {
            1.0
        }
    }

    pub fn phi(&self, rho: f64, energy: f64) -> f64 {
        if !(rho > 0.0) || !(energy > 0.0) {
            return 0.0;
        }
        self.bump(rho.ln(), self.rho_min.ln(), self.rho_max.ln())
            * self.bump(energy.ln(), self.energy_min.ln(), self.energy_max.ln())
    }
}

/// `(Phi g, (1 - Phi) g)`, with the residual part formed as `g - Phi g` so
/// the two pieces reassemble `g`.
pub fn essential_split(win: &EssentialWindow, pt: &PhasePoint, g: f64) -> (f64, f64) {
    let ess = win.phi(pt.rho, pt.energy) * g;
    (ess, g - ess)
}

/// Relative energy divided by the coercivity weight
/// `[|rho - r|^2 + |E - r e|^2 + |m/rho - U|^2]_ess + [1 + rho + rho|s| + E + |m|^2/rho]_res`.
pub fn coercivity_ratio(
    model: &ThermoModel,
    win: &EssentialWindow,
    pt: &PhasePoint,
    reference: &Reference,
) -> Result<f64> {
    let num = relative_energy(model, &CutOff::identity(), pt, reference)?;
    let phi = win.phi(pt.rho, pt.energy);
    let Reference { r, theta, velocity: u } = *reference;

    let ess = if phi > 0.0 {
        let du = [
            pt.momentum[0] / pt.rho - u[0],
            pt.momentum[1] / pt.rho - u[1],
            pt.momentum[2] / pt.rho - u[2],
        ];
        let de = pt.energy - r * model.specific_energy(r, theta);
        (pt.rho - r).powi(2) + de * de + norm2(&du)
    } else {
        0.0
    };
    let res = if phi < 1.0 {
        let rho_s = if pt.rho > 0.0 {
            pt.rho * model.entropy_unchecked(pt.rho, pt.energy).abs()
        } else {
            0.0
        };
        1.0 + pt.rho + rho_s + pt.energy + 2.0 * pt.kinetic_energy()
    } else {
        0.0
    };
    let den = phi * ess + (1.0 - phi) * res;
    if !(den > 0.0) {
        return Err(ThermoError::Domain(
            "coercivity weight vanishes at the reference point".into(),
        ));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn model(c_v: f64) -> ThermoModel {
        ThermoModel::perfect_gas(c_v).unwrap()
    }

    /// Independent term-by-term evaluation in `(rho, theta, u)` variables,
    /// with the perfect-gas derivatives written out by hand.
    fn relative_energy_oracle(c_v: f64, rho: f64, theta: f64, u: [f64; 3], r: f64, th: f64, uu: [f64; 3]) -> f64 {
        let s = |rho: f64, theta: f64| c_v * theta.ln() - rho.ln();
        let du2: f64 = (0..3).map(|k| (u[k] - uu[k]).powi(2)).sum();
        let h_ref = c_v * r * th - th * r * s(r, th);
        let dh_ref = c_v * th - th * (s(r, th) - 1.0);
        0.5 * rho * du2 + c_v * rho * theta - th * rho * s(rho, theta) - dh_ref * (rho - r) - h_ref
    }

    #[test]
    fn vanishes_at_reference() {
        let m = model(1.0);
        let pt = PhasePoint { rho: 1.0, energy: 1.0, momentum: [0.0; 3] };
        let v = relative_energy(&m, &CutOff::identity(), &pt, &Reference::new(1.0, 1.0, [0.0; 3])).unwrap();
        assert!(v.abs() < 1e-15);

        let m = model(1.5);
        let refr = Reference::new(1.7, 0.6, [0.3, -1.2, 2.0]);
        let pt = m.primitive_to_conserved(refr.r, refr.theta, refr.velocity).unwrap();
        let v = relative_energy(&m, &CutOff::identity(), &pt, &refr).unwrap();
        assert!(v.abs() < 1e-12, "{v}");
    }

    #[test]
    fn matches_oracle_off_reference() {
        let m = model(1.0);
        let pt = PhasePoint { rho: 1.1, energy: 1.0, momentum: [0.0; 3] };
        let v = relative_energy(&m, &CutOff::identity(), &pt, &Reference::new(1.0, 1.0, [0.0; 3])).unwrap();
        // theta = E / (c_v rho)
        let oracle = relative_energy_oracle(1.0, 1.1, 1.0 / 1.1, [0.0; 3], 1.0, 1.0, [0.0; 3]);
        assert!(v > 0.0);
        assert_relative_eq!(v, oracle, epsilon = 1e-14);
        // closed form for this point: 2.2 ln 1.1 - 0.2
        assert_relative_eq!(oracle, 2.2 * 1.1f64.ln() - 0.2, epsilon = 1e-14);
        assert!((v - 0.0096824).abs() < 1e-7);
    }

    #[test]
    fn essential_split_regimes() {
        let m = model(1.5);
        let win = EssentialWindow::new(&m, 0.5, 2.0, 0.5, 2.0, 0.25).unwrap();
        let inside = m.primitive_to_conserved(1.0, 1.0, [0.0; 3]).unwrap();
        assert_eq!(essential_split(&win, &inside, 3.5), (3.5, 0.0));
        let outside = m.primitive_to_conserved(100.0, 1.0, [0.0; 3]).unwrap();
        assert_eq!(essential_split(&win, &outside, 3.5), (0.0, 3.5));
        let mid = m.primitive_to_conserved(2.2, 1.0, [0.0; 3]).unwrap();
        let phi = win.phi(mid.rho, mid.energy);
        assert!(phi > 0.0 && phi < 1.0, "{phi}");
        let (a, b) = essential_split(&win, &mid, 3.5);
        assert!((a + b - 3.5).abs() <= 1e-15);
    }

    #[test]
    fn coercivity_small_perturbation_matches_taylor() {
        let m = model(1.5);
        let win = EssentialWindow::new(&m, 0.5, 2.0, 0.5, 2.0, 0.25).unwrap();
        let refr = Reference::new(1.2, 0.9, [0.4, 0.0, 0.0]);
        let base = m.primitive_to_conserved(refr.r, refr.theta, refr.velocity).unwrap();
        // Second-order Taylor expansion of the relative energy for a pure
        // density perturbation at fixed (E, m):
        //   E_rel ~ d^2/2 (Theta (c_v+1)/r + |U|^2/r)
        //   weight ~ d^2 (1 + |U|^2/r^2)
        let u2 = norm2(&refr.velocity);
        let taylor = (refr.theta * (m.c_v() + 1.0) + u2) / (2.0 * refr.r * (1.0 + u2 / (refr.r * refr.r)));
        let mut prev: Option<f64> = None;
        for d in [1e-3, 1e-4, 1e-5, 1e-6] {
            let pt = PhasePoint { rho: base.rho + d, ..base };
            let ratio = coercivity_ratio(&m, &win, &pt, &refr).unwrap();
            assert!(ratio > 0.0 && ratio.is_finite());
            assert!((ratio / taylor - 1.0).abs() < 5e-3, "d={d}: {ratio} vs {taylor}");
            if let Some(p) = prev {
                assert!((ratio / p - 1.0).abs() < 5e-3);
            }
            prev = Some(ratio);
        }
        assert!(coercivity_ratio(&m, &win, &base, &refr).is_err());
    }

    #[test]
    fn coercivity_residual_regime() {
        let m = model(1.5);
        let win = EssentialWindow::new(&m, 0.5, 2.0, 0.5, 2.0, 0.25).unwrap();
        let refr = Reference::new(1.0, 1.0, [0.0; 3]);
        let pt = m.primitive_to_conserved(200.0, 1.0, [0.5, 0.0, 0.0]).unwrap();
        assert_eq!(win.phi(pt.rho, pt.energy), 0.0);
        assert!(coercivity_ratio(&m, &win, &pt, &refr).unwrap() > 0.0);
    }

    #[test]
    fn vacuum_conventions() {
        let m = model(1.5);
        let refr = Reference::new(1.0, 2.0, [0.0; 3]);
        let v = relative_energy(&m, &CutOff::identity(), &PhasePoint::default(), &refr).unwrap();
        // E_rel(vacuum) = r dH/drho - H = r Theta
        assert_relative_eq!(v, 2.0, epsilon = 1e-14);
        let bad = PhasePoint { rho: 0.0, energy: 0.0, momentum: [1.0, 0.0, 0.0] };
        assert!(relative_energy(&m, &CutOff::identity(), &bad, &refr).is_err());
    }

    proptest! {
        #[test]
        fn nonnegative_in_window(
            r in 0.5f64..2.0, th in 0.5f64..2.0, uu in -1.0f64..1.0,
            rho in 0.4f64..2.5, theta in 0.4f64..2.5, u in -2.0f64..2.0,
        ) {
            let m = model(1.5);
            let pt = m.primitive_to_conserved(rho, theta, [u, 0.0, 0.0]).unwrap();
            let v = relative_energy(&m, &CutOff::identity(), &pt, &Reference::new(r, th, [uu, 0.0, 0.0])).unwrap();
            prop_assert!(v >= -1e-12, "{}", v);
            let oracle = relative_energy_oracle(1.5, rho, theta, [u, 0.0, 0.0], r, th, [uu, 0.0, 0.0]);
            prop_assert!((v - oracle).abs() <= 1e-11 * (1.0 + oracle.abs()));
        }

        #[test]
        fn zero_at_any_reference(
            r in 0.5f64..2.0, th in 0.5f64..2.0, u in prop::array::uniform3(-3.0f64..3.0),
        ) {
            let m = model(1.5);
            let refr = Reference::new(r, th, u);
            let pt = m.primitive_to_conserved(r, th, u).unwrap();
            let v = relative_energy(&m, &CutOff::identity(), &pt, &refr).unwrap();
            prop_assert!(v.abs() <= 1e-12);
        }

        #[test]
        fn split_is_partition(lr in -5.0f64..5.0, le in -5.0f64..5.0, g in -1e3f64..1e3) {
            let m = model(1.5);
            let win = EssentialWindow::new(&m, 0.5, 2.0, 0.5, 2.0, 0.25).unwrap();
            let pt = PhasePoint { rho: lr.exp(), energy: le.exp(), momentum: [0.0; 3] };
            let phi = win.phi(pt.rho, pt.energy);
            prop_assert!((0.0..=1.0).contains(&phi));
            let (a, b) = essential_split(&win, &pt, g);
            prop_assert!((a + b - g).abs() <= 1e-15 * g.abs().max(1.0));
        }
    }
}
