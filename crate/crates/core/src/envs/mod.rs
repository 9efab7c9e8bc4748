//! Parametric continuous-time dynamics and a fixed-step RK4 integrator.

mod cartpole;
mod racecar;
mod rocket;
mod track;

pub use cartpole::{cartpole_derivative, cartpole_energy, CART_MASS};
pub use racecar::{racecar_derivative, SPEED_DAMPING, YAW_DAMPING};
pub use rocket::{rocket2d_derivative, ROCKET_HEIGHT};
pub use track::{track_progress, track_reference, ProgressTracker, TrackGeometry, TrackPose};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::inference::ParamBox;

pub const GRAVITY: f64 = 9.81;

/// Largest state dimension among the built-in environments.
pub const MAX_STATE_DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    Cartpole,
    Rocket2d,
    Racecar,
    /// `x' = -x + u`; the single parameter is unused.
    Decay,
    /// `p' = v, v' = u`; the single parameter is unused.
    DoubleIntegrator,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Cartpole => "cartpole",
            EnvKind::Rocket2d => "rocket2d",
            EnvKind::Racecar => "racecar",
            EnvKind::Decay => "decay",
            EnvKind::DoubleIntegrator => "double_integrator",
        }
    }

    pub fn state_dim(self) -> usize {
        match self {
            EnvKind::Cartpole => 4,
            EnvKind::Rocket2d => 6,
            EnvKind::Racecar => 5,
            EnvKind::Decay => 1,
            EnvKind::DoubleIntegrator => 2,
        }
    }

    pub fn control_dim(self) -> usize {
        match self {
            EnvKind::Cartpole | EnvKind::Decay | EnvKind::DoubleIntegrator => 1,
            EnvKind::Rocket2d | EnvKind::Racecar => 2,
        }
    }

    pub fn param_dim(self) -> usize {
        match self {
            EnvKind::Cartpole | EnvKind::Racecar => 2,
            EnvKind::Rocket2d => 3,
            EnvKind::Decay | EnvKind::DoubleIntegrator => 1,
        }
    }

    /// State coordinates that are angles; their errors are wrapped to `(-pi, pi]`.
    pub fn angle_indices(self) -> &'static [usize] {
        match self {
            EnvKind::Cartpole => &[1],
            EnvKind::Rocket2d | EnvKind::Racecar => &[2],
            EnvKind::Decay | EnvKind::DoubleIntegrator => &[],
        }
    }

    /// Time derivative of the state, written into `out`.
    ///
    /// Slices must already have the kind's dimensions.
    pub fn derivative(self, x: &[f64], u: &[f64], theta: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            EnvKind::Cartpole => {
                let d = cartpole_derivative(arr(x), u[0], arr(theta))?;
                out.copy_from_slice(&d);
            }
            EnvKind::Rocket2d => {
                let d = rocket2d_derivative(arr(x), arr(u), arr(theta))?;
                out.copy_from_slice(&d);
            }
            EnvKind::Racecar => {
                let d = racecar_derivative(arr(x), arr(u), arr(theta))?;
                out.copy_from_slice(&d);
            }
            EnvKind::Decay => out[0] = -x[0] + u[0],
            EnvKind::DoubleIntegrator => {
                out[0] = x[1];
                out[1] = u[0];
            }
        }
        Ok(())
    }
}

fn arr<const N: usize>(s: &[f64]) -> &[f64; N] {
    s.try_into().expect("slice length checked by caller")
}

/// One environment: dynamics kind, integration step, control box, true and
/// prior parameter sets, and the initial state of a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvModel {
    pub name: EnvKind,
    pub dt: f64,
    pub control_bounds: Vec<(f64, f64)>,
    pub true_params: Vec<f64>,
    pub param_bounds: ParamBox,
    pub initial_state: Vec<f64>,
}

impl EnvModel {
    pub fn state_dim(&self) -> usize {
        self.name.state_dim()
    }

    pub fn control_dim(&self) -> usize {
        self.name.control_dim()
    }

    pub fn param_dim(&self) -> usize {
        self.name.param_dim()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("env.dt", format!("must be positive, got {}", self.dt)));
        }
        if self.control_bounds.len() != self.control_dim() {
            return Err(Error::config(
                "env.control_bounds",
                format!(
                    "{} expects {} control channels, got {}",
                    self.name.name(),
                    self.control_dim(),
                    self.control_bounds.len()
                ),
            ));
        }
        for (i, (lo, hi)) in self.control_bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::config(
                    "env.control_bounds",
                    format!("channel {i}: need finite min < max, got [{lo}, {hi}]"),
                ));
            }
        }
        self.param_bounds.validate("env.param_bounds")?;
        if self.param_bounds.dim() != self.param_dim() {
            return Err(Error::config(
                "env.param_bounds",
                format!("{} expects {} parameters", self.name.name(), self.param_dim()),
            ));
        }
        if !self.param_bounds.contains(&self.true_params) {
            return Err(Error::config("env.true_params", "must lie inside env.param_bounds"));
        }
        if self.initial_state.len() != self.state_dim() || self.initial_state.iter().any(|v| !v.is_finite()) {
            return Err(Error::config(
                "env.initial_state",
                format!("need {} finite entries", self.state_dim()),
            ));
        }
        Ok(())
    }

    pub fn clamp_control(&self, u: &mut [f64]) {
        for (v, (lo, hi)) in u.iter_mut().zip(&self.control_bounds) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// One RK4 step of length `dt` with `u` clamped to the control box.
    pub fn step(&self, x: &[f64], u: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        check_dim("step state", self.state_dim(), x.len())?;
        check_dim("step control", self.control_dim(), u.len())?;
        check_dim("step params", self.param_dim(), theta.len())?;
        let mut out = vec![0.0; x.len()];
        self.step_into(x, u, theta, &mut out)?;
        Ok(out)
    }

    /// Allocation-free [`EnvModel::step`]; dimensions are the caller's
    /// responsibility.
    pub fn step_into(&self, x: &[f64], u: &[f64], theta: &[f64], out: &mut [f64]) -> Result<()> {
        let mut uc = [0.0; 2];
        let uc = &mut uc[..u.len()];
        uc.copy_from_slice(u);
        self.clamp_control(uc);
        rk4_step(self.name, self.dt, x, uc, theta, out)
    }
}

/// Classic fourth-order Runge-Kutta step of `kind`'s dynamics.
pub fn rk4_step(kind: EnvKind, dt: f64, x: &[f64], u: &[f64], theta: &[f64], out: &mut [f64]) -> Result<()> {
    let n = x.len();
    let mut k1 = [0.0; MAX_STATE_DIM];
    let mut k2 = [0.0; MAX_STATE_DIM];
    let mut k3 = [0.0; MAX_STATE_DIM];
    let mut k4 = [0.0; MAX_STATE_DIM];
    let mut tmp = [0.0; MAX_STATE_DIM];
    let (k1, k2, k3, k4, tmp) = (&mut k1[..n], &mut k2[..n], &mut k3[..n], &mut k4[..n], &mut tmp[..n]);

    kind.derivative(x, u, theta, k1)?;
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * dt * k1[i];
    }
    kind.derivative(tmp, u, theta, k2)?;
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * dt * k2[i];
    }
    kind.derivative(tmp, u, theta, k3)?;
    for i in 0..n {
        tmp[i] = x[i] + dt * k3[i];
    }
    kind.derivative(tmp, u, theta, k4)?;
    for i in 0..n {
        out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if !out[i].is_finite() {
            return Err(Error::NonFiniteState);
        }
    }
    Ok(())
}

/// Free-function form of [`EnvModel::step`].
pub fn step(env: &EnvModel, x: &[f64], u: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
    env.step(x, u, theta)
}

/// Wraps an angle difference to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Default environments used by the reference experiments.
pub mod presets {
    use std::f64::consts::PI;

    use super::*;

    pub fn cartpole() -> EnvModel {
        EnvModel {
            name: EnvKind::Cartpole,
            dt: 0.02,
            control_bounds: vec![(-10.0, 10.0)],
            true_params: vec![0.5, 0.75],
            param_bounds: ParamBox {
                lower: vec![0.3, 0.3],
                upper: vec![1.0, 1.0],
            },
            initial_state: vec![0.0; 4],
        }
    }

    pub fn cartpole_goal() -> Vec<f64> {
        vec![0.0, PI, 0.0, 0.0]
    }

    pub fn rocket2d() -> EnvModel {
        EnvModel {
            name: EnvKind::Rocket2d,
            dt: 0.015,
            control_bounds: vec![(0.0, 5.0), (-0.5, 0.5)],
            true_params: vec![0.1, 0.01, 0.7],
            param_bounds: ParamBox {
                lower: vec![0.05, 0.005, 0.05],
                upper: vec![5.0, 2.0, ROCKET_HEIGHT],
            },
            initial_state: vec![0.0, 0.5, 0.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn rocket2d_goal() -> Vec<f64> {
        vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.0]
    }

    pub fn racecar() -> EnvModel {
        EnvModel {
            name: EnvKind::Racecar,
            dt: 0.015,
            control_bounds: vec![(-0.2, 0.5), (-0.05, 0.05)],
            true_params: vec![0.1, 0.01],
            param_bounds: ParamBox {
                lower: vec![0.05, 0.00001],
                upper: vec![0.3, 0.5],
            },
            initial_state: vec![-2.5, -2.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn decay(dt: f64) -> EnvModel {
        EnvModel {
            name: EnvKind::Decay,
            dt,
            control_bounds: vec![(-1.0, 1.0)],
            true_params: vec![0.0],
            param_bounds: ParamBox {
                lower: vec![-1.0],
                upper: vec![1.0],
            },
            initial_state: vec![1.0],
        }
    }

    pub fn double_integrator(dt: f64, u_max: f64) -> EnvModel {
        EnvModel {
            name: EnvKind::DoubleIntegrator,
            dt,
            control_bounds: vec![(-u_max, u_max)],
            true_params: vec![0.0],
            param_bounds: ParamBox {
                lower: vec![-1.0],
                upper: vec![1.0],
            },
            initial_state: vec![1.0, 0.0],
        }
    }
}
