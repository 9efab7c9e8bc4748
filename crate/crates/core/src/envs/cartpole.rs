//! Frictionless cart with a point-mass pole.
//!
//! State `[x, phi, v, omega]` with `phi = 0` hanging straight down and
//! `phi = pi` upright; control is the horizontal force on the cart; parameters
//! are `[m_pole, l_pole]`. With cart mass `M`, the Lagrangian gives
//!
//! ```text
//! x_dd   = (u + m sin(phi) (l omega^2 + g cos(phi))) / (M + m sin^2(phi))
//! phi_dd = -(x_dd cos(phi) + g sin(phi)) / l
//! ```

use super::GRAVITY;
use crate::error::{Error, Result};

pub const CART_MASS: f64 = 1.0;

pub fn cartpole_derivative(state: &[f64; 4], force: f64, theta: &[f64; 2]) -> Result<[f64; 4]> {
    let [m, l] = *theta;
    if !(m > 0.0) {
        return Err(Error::Domain {
            context: "cartpole",
            name: "m_pole",
            value: m,
        });
    }
    if !(l > 0.0) {
        return Err(Error::Domain {
            context: "cartpole",
            name: "l_pole",
            value: l,
        });
    }
    let [_, phi, v, omega] = *state;
    let (s, c) = phi.sin_cos();
    let x_dd = (force + m * s * (l * omega * omega + GRAVITY * c)) / (CART_MASS + m * s * s);
    let phi_dd = -(x_dd * c + GRAVITY * s) / l;
    Ok([v, omega, x_dd, phi_dd])
}

/// Total mechanical energy, zero potential at the pivot height.
pub fn cartpole_energy(state: &[f64; 4], theta: &[f64; 2]) -> f64 {
    let [m, l] = *theta;
    let [_, phi, v, omega] = *state;
    let kinetic = 0.5 * (CART_MASS + m) * v * v + m * l * v * omega * phi.cos() + 0.5 * m * l * l * omega * omega;
    kinetic - m * GRAVITY * l * phi.cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn hanging_equilibrium() {
        let d = cartpole_derivative(&[0.0; 4], 0.0, &[0.5, 0.75]).unwrap();
        assert_eq!(d, [0.0; 4]);
    }

    #[test]
    fn upright_equilibrium() {
        let d = cartpole_derivative(&[0.0, PI, 0.0, 0.0], 0.0, &[0.5, 0.75]).unwrap();
        assert_abs_diff_eq!(d[2], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d[3], 0.0, epsilon = 1e-12);
    }

    /// Independent route: assemble the mass matrix and generalized forces of
    /// the Lagrangian and solve the 2x2 system by Cramer's rule.
    fn lagrangian_accelerations(state: &[f64; 4], u: f64, m: f64, l: f64) -> (f64, f64) {
        let [_, phi, _, omega] = *state;
        let m11 = CART_MASS + m;
        let m12 = m * l * phi.cos();
        let m22 = m * l * l;
        let f1 = u + m * l * omega * omega * phi.sin();
        let f2 = -m * GRAVITY * l * phi.sin();
        let det = m11 * m22 - m12 * m12;
        ((f1 * m22 - m12 * f2) / det, (m11 * f2 - m12 * f1) / det)
    }

    #[test]
    fn matches_lagrangian_mass_matrix_solve() {
        let state = [0.0, PI / 2.0, 0.0, 0.0];
        let d = cartpole_derivative(&state, 0.0, &[0.5, 0.75]).unwrap();
        let (xdd, pdd) = lagrangian_accelerations(&state, 0.0, 0.5, 0.75);
        assert_abs_diff_eq!(d[2], xdd, epsilon = 1e-12);
        assert_abs_diff_eq!(d[3], pdd, epsilon = 1e-12);
        assert_abs_diff_eq!(d[3], -GRAVITY / 0.75, epsilon = 1e-12);

        for (state, u) in [([0.3, 2.1, -0.4, 1.7], 3.0), ([-1.0, -0.6, 2.0, -3.0], -7.5)] {
            let d = cartpole_derivative(&state, u, &[0.8, 0.4]).unwrap();
            let (xdd, pdd) = lagrangian_accelerations(&state, u, 0.8, 0.4);
            assert_abs_diff_eq!(d[2], xdd, epsilon = 1e-10);
            assert_abs_diff_eq!(d[3], pdd, epsilon = 1e-10);
        }
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(cartpole_derivative(&[0.0; 4], 0.0, &[0.0, 0.75]).is_err());
        assert!(cartpole_derivative(&[0.0; 4], 0.0, &[0.5, -1.0]).is_err());
    }
}
