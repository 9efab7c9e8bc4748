//! Planar rigid-body rocket with a gimbaled thruster at its base.
//!
//! State `[x, y, phi, x_dot, y_dot, omega]` with `phi = 0` upright and positive
//! counter-clockwise; control `[thrust, gimbal]`; parameters `[m, I, l_com]`
//! where `l_com` is the distance from the base to the center of mass.
//!
//! The thrust acts along the body axis rotated by `-gimbal`, so a positive
//! gimbal produces the torque `thrust * sin(gimbal) * l_com` about the center
//! of mass and pushes the rocket toward `+x` when upright.

use super::GRAVITY;
use crate::error::{Error, Result};

pub const ROCKET_HEIGHT: f64 = 1.0;

pub fn rocket2d_derivative(state: &[f64; 6], control: &[f64; 2], theta: &[f64; 3]) -> Result<[f64; 6]> {
    let [m, inertia, l_com] = *theta;
    let domain = |name, value| Error::Domain {
        context: "rocket2d",
        name,
        value,
    };
    if !(m > 0.0) {
        return Err(domain("m", m));
    }
    if !(inertia > 0.0) {
        return Err(domain("inertia", inertia));
    }
    if !(l_com > 0.0 && l_com <= ROCKET_HEIGHT) {
        return Err(domain("l_com", l_com));
    }
    let [_, _, phi, xd, yd, omega] = *state;
    let [thrust, gimbal] = *control;
    let (s, c) = (phi - gimbal).sin_cos();
    Ok([
        xd,
        yd,
        omega,
        -thrust * s / m,
        thrust * c / m - GRAVITY,
        thrust * gimbal.sin() * l_com / inertia,
    ])
}
