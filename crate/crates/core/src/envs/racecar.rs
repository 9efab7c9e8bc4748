//! Dynamic unicycle with linear damping.
//!
//! State `[x, y, phi, v, omega]`, control `[throttle, steer]`, parameters
//! `[m, I]`.

use crate::error::{Error, Result};

pub const SPEED_DAMPING: f64 = 0.1;
pub const YAW_DAMPING: f64 = 0.1;

pub fn racecar_derivative(state: &[f64; 5], control: &[f64; 2], theta: &[f64; 2]) -> Result<[f64; 5]> {
    let [m, inertia] = *theta;
    if !(m > 0.0) {
        return Err(Error::Domain {
            context: "racecar",
            name: "m",
            value: m,
        });
    }
    if !(inertia > 0.0) {
        return Err(Error::Domain {
            context: "racecar",
            name: "inertia",
            value: inertia,
        });
    }
    let [_, _, phi, v, omega] = *state;
    let [throttle, steer] = *control;
    let (s, c) = phi.sin_cos();
    Ok([
        v * c,
        v * s,
        omega,
        throttle / m - SPEED_DAMPING * v,
        steer / inertia - YAW_DAMPING * omega,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rest_is_an_equilibrium() {
        assert_eq!(racecar_derivative(&[1.0, -2.0, 0.3, 0.0, 0.0], &[0.0, 0.0], &[0.1, 0.01]).unwrap(), [0.0; 5]);
    }

    #[test]
    fn damping_and_throttle() {
        let d = racecar_derivative(&[0.0, 0.0, 0.0, 1.0, 0.0], &[0.0, 0.0], &[0.1, 0.01]).unwrap();
        assert_abs_diff_eq!(d[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[3], -0.1, epsilon = 1e-15);
        let d = racecar_derivative(&[0.0; 5], &[0.05, 0.0], &[0.1, 0.01]).unwrap();
        assert_abs_diff_eq!(d[3], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(racecar_derivative(&[0.0; 5], &[0.0, 0.0], &[0.0, 0.01]).is_err());
        assert!(racecar_derivative(&[0.0; 5], &[0.0, 0.0], &[0.1, 0.0]).is_err());
    }
}
