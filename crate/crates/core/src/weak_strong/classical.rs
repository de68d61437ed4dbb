use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::thermo::{Reference, ThermoModel};

/// Exact smooth solutions of the Euler system on the periodic domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassicalSolution {
    ConstantState {
        r: f64,
        theta: f64,
        velocity: [f64; 3],
    },
    /// `r = r_mean + amplitude sin(2 pi k.(x - U t))`, `U` constant and
    /// `Theta = pressure / r`, so the pressure is uniform.
    ContactAdvection {
        r_mean: f64,
        amplitude: f64,
        velocity: [f64; 3],
        pressure: f64,
        #[serde(default = "default_wavenumber")]
        wavenumber: [f64; 3],
    },
    /// `base` observed from a frame moving with velocity `-boost`.
    GalileanBoost {
        base: Box<ClassicalSolution>,
        boost: [f64; 3],
    },
}

fn default_wavenumber() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

impl Default for ClassicalSolution {
    fn default() -> Self {
        Self::contact()
    }
}

impl ClassicalSolution {
    /// Contact wave `r0 = 1 + 0.2 sin(2 pi x)`, `U = (1, 0, 0)`, `p = 1`.
    pub fn contact() -> Self {
        Self::ContactAdvection {
            r_mean: 1.0,
            amplitude: 0.2,
            velocity: [1.0, 0.0, 0.0],
            pressure: 1.0,
            wavenumber: default_wavenumber(),
        }
    }

    pub fn constant(r: f64, theta: f64, velocity: [f64; 3]) -> Self {
        Self::ConstantState { r, theta, velocity }
    }

    pub fn boosted(self, boost: [f64; 3]) -> Self {
        Self::GalileanBoost { base: Box::new(self), boost }
    }

    /// Checks `r > 0` and `Theta > 0` for all times and positions.
    pub fn validate(&self) -> Result<(), String> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Self::ConstantState { r, theta, velocity } => {
                if !(*r > 0.0 && *theta > 0.0) || !finite(velocity) {
                    return Err(format!("constant state needs r, theta > 0, got ({r}, {theta})"));
                }
            }
            Self::ContactAdvection { r_mean, amplitude, velocity, pressure, wavenumber } => {
                if !(*r_mean > amplitude.abs()) || !(*pressure > 0.0) {
                    return Err(format!(
                        "contact wave needs r_mean > |amplitude| and pressure > 0, got ({r_mean}, {amplitude}, {pressure})"
                    ));
                }
                if !finite(velocity) || !finite(wavenumber) {
                    return Err("contact wave parameters must be finite".into());
                }
            }
            Self::GalileanBoost { base, boost } => {
                if !finite(boost) {
                    return Err("boost must be finite".into());
                }
                base.validate()?;
            }
        }
        Ok(())
    }

    /// Values and first derivatives at `(t, x)`.
    pub fn eval(&self, t: f64, x: [f64; 3]) -> ClassicalState {
        match self {
            Self::ConstantState { r, theta, velocity } => ClassicalState {
                r: *r,
                theta: *theta,
                velocity: *velocity,
                ..ClassicalState::default()
            },
            Self::ContactAdvection { r_mean, amplitude, velocity, pressure, wavenumber } => {
                let mut phase = 0.0;
                let mut k_dot_u = 0.0;
                for j in 0..3 {
                    phase += wavenumber[j] * (x[j] - velocity[j] * t);
                    k_dot_u += wavenumber[j] * velocity[j];
                }
                let phase = 2.0 * PI * phase;
                let r = r_mean + amplitude * phase.sin();
                let c = 2.0 * PI * amplitude * phase.cos();
                let mut dr = [0.0; 4];
                dr[0] = -c * k_dot_u;
                for j in 0..3 {
                    dr[j + 1] = c * wavenumber[j];
                }
                let theta = pressure / r;
                let dtheta = dr.map(|d| -pressure / (r * r) * d);
                ClassicalState { r, theta, velocity: *velocity, dr, dtheta, dvelocity: [[0.0; 4]; 3] }
            }
            Self::GalileanBoost { base, boost } => {
                let mut y = x;
                for j in 0..3 {
                    y[j] -= boost[j] * t;
                }
                let mut s = base.eval(t, y);
                let shift = |d: &mut [f64; 4]| {
                    d[0] -= boost[0] * d[1] + boost[1] * d[2] + boost[2] * d[3];
                };
                shift(&mut s.dr);
                shift(&mut s.dtheta);
                for k in 0..3 {
                    shift(&mut s.dvelocity[k]);
                    s.velocity[k] += boost[k];
                }
                s
            }
        }
    }

    /// Residuals of mass, momentum and total energy balance at `(t, x)`
    /// computed from the analytic derivatives.
    pub fn euler_residual(&self, model: &ThermoModel, t: f64, x: [f64; 3]) -> [f64; 5] {
        let s = self.eval(t, x);
        let cv = model.c_v();
        // p = r Theta, total energy density r (|U|^2/2 + c_v Theta).
        let dp: [f64; 4] = std::array::from_fn(|a| s.dr[a] * s.theta + s.r * s.dtheta[a]);
        let p = s.r * s.theta;
        let u = s.velocity;
        let u2 = u.iter().map(|v| v * v).sum::<f64>();
        let du2: [f64; 4] = std::array::from_fn(|a| 2.0 * (0..3).map(|k| u[k] * s.dvelocity[k][a]).sum::<f64>());
        let e_tot = s.r * (0.5 * u2 + cv * s.theta);
        let de_tot: [f64; 4] = std::array::from_fn(|a| {
            s.dr[a] * (0.5 * u2 + cv * s.theta) + s.r * (0.5 * du2[a] + cv * s.dtheta[a])
        });
        // d_a(r u_k) and d_a(r u_k u_j)
        let d_ru = |k: usize, a: usize| s.dr[a] * u[k] + s.r * s.dvelocity[k][a];
        let mut res = [0.0; 5];
        res[0] = s.dr[0];
        for j in 0..3 {
            res[0] += d_ru(j, j + 1);
        }
        for k in 0..3 {
            let mut v = d_ru(k, 0) + dp[k + 1];
            for j in 0..3 {
                v += d_ru(k, j + 1) * u[j] + s.r * u[k] * s.dvelocity[j][j + 1];
            }
            res[1 + k] = v;
        }
        res[4] = de_tot[0];
        for j in 0..3 {
            res[4] += (de_tot[j + 1] + dp[j + 1]) * u[j] + (e_tot + p) * s.dvelocity[j][j + 1];
        }
        res
    }
}

/// Classical solution sample; derivative arrays are indexed `[d_t, d_x1,
/// d_x2, d_x3]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassicalState {
    pub r: f64,
    pub theta: f64,
    pub velocity: [f64; 3],
    pub dr: [f64; 4],
    pub dtheta: [f64; 4],
    /// `dvelocity[k][a] = d_a U_k`.
    pub dvelocity: [[f64; 4]; 3],
}

impl ClassicalState {
    pub fn reference(&self) -> Reference {
        Reference::new(self.r, self.theta, self.velocity)
    }

    /// `d_a p(r, Theta)` for the perfect gas.
    pub fn dpressure(&self, a: usize) -> f64 {
        self.dr[a] * self.theta + self.r * self.dtheta[a]
    }

    pub fn div_velocity(&self) -> f64 {
        (0..3).map(|k| self.dvelocity[k][k + 1]).sum()
    }

    /// Frobenius norm of the spatial velocity gradient.
    pub fn grad_velocity_norm(&self) -> f64 {
        let mut acc = 0.0;
        for k in 0..3 {
            for j in 1..4 {
                acc += self.dvelocity[k][j] * self.dvelocity[k][j];
            }
        }
        acc.sqrt()
    }
}
