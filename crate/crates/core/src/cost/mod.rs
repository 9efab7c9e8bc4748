//! Quadratic stage and terminal costs, the shooting objective, the
//! optimality gap and the two robust aggregations over particles.

mod objective;

pub use objective::{
    dro_from_costs, dro_risk_cost, optimality_gap, robust_cost, robust_from_costs, trajectory_cost,
    TrajectoryObjective,
};

use serde::{Deserialize, Serialize};

use crate::envs::{track_reference, wrap_angle, TrackGeometry};
use crate::error::{check_dim, Error, Result};

/// PSD weight matrix, given either by its diagonal or densely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightMatrix {
    Diagonal(Vec<f64>),
    Dense(Vec<Vec<f64>>),
}

impl WeightMatrix {
    pub fn identity(n: usize) -> Self {
        WeightMatrix::Diagonal(vec![1.0; n])
    }

    pub fn zeros(n: usize) -> Self {
        WeightMatrix::Diagonal(vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        match self {
            WeightMatrix::Diagonal(d) => d.len(),
            WeightMatrix::Dense(m) => m.len(),
        }
    }

    /// `v^T W v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        match self {
            WeightMatrix::Diagonal(d) => d.iter().zip(v).map(|(w, x)| w * x * x).sum(),
            WeightMatrix::Dense(m) => m
                .iter()
                .zip(v)
                .map(|(row, vi)| vi * row.iter().zip(v).map(|(w, vj)| w * vj).sum::<f64>())
                .sum(),
        }
    }

    /// Checks shape, symmetry and positive semidefiniteness.
    pub fn validate(&self, field: &str, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::config(field, format!("expected dimension {n}, got {}", self.dim())));
        }
        match self {
            WeightMatrix::Diagonal(d) => {
                if d.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(Error::config(field, "diagonal weights must be finite and nonnegative"));
                }
            }
            WeightMatrix::Dense(m) => {
                if m.iter().any(|row| row.len() != n) {
                    return Err(Error::config(field, format!("every row needs {n} entries")));
                }
                let mat = nalgebra::DMatrix::from_fn(n, n, |i, j| m[i][j]);
                let scale = mat.amax().max(1.0);
                if (&mat - mat.transpose()).amax() > 1e-12 * scale {
                    return Err(Error::config(field, "matrix is not symmetric"));
                }
                let min_eig = mat.symmetric_eigenvalues().min();
                if !(min_eig >= -1e-12 * scale) {
                    return Err(Error::config(field, format!("matrix is not PSD (min eigenvalue {min_eig})")));
                }
            }
        }
        Ok(())
    }
}

/// Desired state: a fixed goal, or a reference that advances along a track
/// at constant speed from the start state's projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Goal {
    Fixed(Vec<f64>),
    Track {
        #[serde(flatten)]
        track: TrackGeometry,
        reference_speed: f64,
    },
}

/// Extra terminal term `sum_k w_k / (|x_T,k - x_0,k| + epsilon)` that rewards
/// displacement over the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisplacementReward {
    pub weights: Vec<f64>,
    #[serde(default = "default_reward_epsilon")]
    pub epsilon: f64,
}

fn default_reward_epsilon() -> f64 {
    1e-3
}

impl DisplacementReward {
    pub fn eval(&self, x_t: &[f64], x_0: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(x_t.iter().zip(x_0))
            .map(|(w, (a, b))| w / ((a - b).abs() + self.epsilon))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    pub q: WeightMatrix,
    pub r: WeightMatrix,
    pub q_terminal: WeightMatrix,
    pub goal: Goal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal_reward: Option<DisplacementReward>,
}

impl CostSpec {
    /// Fixed-goal spec with diagonal weights.
    pub fn diagonal(q: Vec<f64>, r: Vec<f64>, q_terminal: Vec<f64>, goal: Vec<f64>) -> Self {
        CostSpec {
            q: WeightMatrix::Diagonal(q),
            r: WeightMatrix::Diagonal(r),
            q_terminal: WeightMatrix::Diagonal(q_terminal),
            goal: Goal::Fixed(goal),
            terminal_reward: None,
        }
    }

    pub fn validate(&self, state_dim: usize, control_dim: usize) -> Result<()> {
        self.q.validate("cost.q", state_dim)?;
        self.r.validate("cost.r", control_dim)?;
        self.q_terminal.validate("cost.q_terminal", state_dim)?;
        match &self.goal {
            Goal::Fixed(g) => {
                if g.len() != state_dim {
                    return Err(Error::config("cost.goal.fixed", format!("need {state_dim} entries")));
                }
            }
            Goal::Track { track, reference_speed } => {
                track.validate()?;
                if state_dim != 5 {
                    return Err(Error::config("cost.goal.track", "track goals need the racecar state layout"));
                }
                if !reference_speed.is_finite() {
                    return Err(Error::config("cost.goal.track.reference_speed", "must be finite"));
                }
            }
        }
        if let Some(rw) = &self.terminal_reward {
            if rw.weights.len() != state_dim {
                return Err(Error::config("cost.terminal_reward.weights", format!("need {state_dim} entries")));
            }
            if !(rw.epsilon > 0.0) {
                return Err(Error::config("cost.terminal_reward.epsilon", "must be positive"));
            }
        }
        Ok(())
    }

    /// Desired states for horizon steps `0..=horizon` from start `x0`.
    pub fn references(&self, x0: &[f64], horizon: usize, dt: f64) -> Vec<Vec<f64>> {
        match &self.goal {
            Goal::Fixed(g) => vec![g.clone(); horizon + 1],
            Goal::Track { track, reference_speed } => {
                let s0 = track.project(x0[0], x0[1]);
                (0..=horizon)
                    .map(|k| track_reference(track, s0 + reference_speed * dt * (k + 1) as f64, *reference_speed).to_vec())
                    .collect()
            }
        }
    }

    /// `(x - x_des)^T Q (x - x_des) + u^T R u`, with angle coordinates in
    /// `angles` compared modulo `2 pi`.
    pub fn stage_cost(&self, x: &[f64], u: &[f64], x_des: &[f64], angles: &[usize]) -> Result<f64> {
        check_dim("stage_cost state", self.q.dim(), x.len())?;
        check_dim("stage_cost goal", self.q.dim(), x_des.len())?;
        check_dim("stage_cost control", self.r.dim(), u.len())?;
        Ok(self.stage_unchecked(x, u, x_des, angles))
    }

    /// `(x_T - x_des)^T Q_f (x_T - x_des) + r(x_T, x_0)`.
    pub fn terminal_cost(&self, x_t: &[f64], x_des: &[f64], x_0: &[f64], angles: &[usize]) -> Result<f64> {
        check_dim("terminal_cost state", self.q_terminal.dim(), x_t.len())?;
        check_dim("terminal_cost goal", self.q_terminal.dim(), x_des.len())?;
        check_dim("terminal_cost start", self.q_terminal.dim(), x_0.len())?;
        Ok(self.terminal_unchecked(x_t, x_des, x_0, angles))
    }

    pub(crate) fn stage_unchecked(&self, x: &[f64], u: &[f64], x_des: &[f64], angles: &[usize]) -> f64 {
        let mut err = [0.0; crate::envs::MAX_STATE_DIM];
        let err = error_into(x, x_des, angles, &mut err);
        self.q.quad_form(err) + self.r.quad_form(u)
    }

    pub(crate) fn terminal_unchecked(&self, x_t: &[f64], x_des: &[f64], x_0: &[f64], angles: &[usize]) -> f64 {
        let mut err = [0.0; crate::envs::MAX_STATE_DIM];
        let err = error_into(x_t, x_des, angles, &mut err);
        let reward = self.terminal_reward.as_ref().map_or(0.0, |rw| rw.eval(x_t, x_0));
        self.q_terminal.quad_form(err) + reward
    }
}

fn error_into<'a>(x: &[f64], x_des: &[f64], angles: &[usize], buf: &'a mut [f64]) -> &'a [f64] {
    let n = x.len();
    let buf = &mut buf[..n];
    for i in 0..n {
        buf[i] = x[i] - x_des[i];
    }
    for &i in angles {
        buf[i] = wrap_angle(buf[i]);
    }
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec2() -> CostSpec {
        CostSpec::diagonal(vec![1.0, 1.0], vec![1.0], vec![2.0, 2.0], vec![0.0, 0.0])
    }

    #[test]
    fn stage_cost_values() {
        let s = spec2();
        assert_eq!(s.stage_cost(&[0.0, 0.0], &[0.0], &[0.0, 0.0], &[]).unwrap(), 0.0);
        assert_eq!(s.stage_cost(&[1.0, 0.0], &[2.0], &[0.0, 0.0], &[]).unwrap(), 5.0);
        let zero_q = CostSpec::diagonal(vec![0.0, 0.0], vec![3.0], vec![0.0, 0.0], vec![0.0, 0.0]);
        assert_eq!(zero_q.stage_cost(&[7.0, -4.0], &[2.0], &[0.0, 0.0], &[]).unwrap(), 12.0);
        assert!(s.stage_cost(&[1.0], &[2.0], &[0.0, 0.0], &[]).is_err());
    }

    #[test]
    fn terminal_cost_values() {
        let s = spec2();
        assert_eq!(s.terminal_cost(&[0.0, 0.0], &[0.0, 0.0], &[3.0, 3.0], &[]).unwrap(), 0.0);
        assert_eq!(s.terminal_cost(&[1.0, 1.0], &[0.0, 0.0], &[0.0, 0.0], &[]).unwrap(), 4.0);
    }

    #[test]
    fn displacement_reward_is_regularized() {
        let mut s = spec2();
        s.q_terminal = WeightMatrix::zeros(2);
        s.terminal_reward = Some(DisplacementReward {
            weights: vec![0.5, 0.25],
            epsilon: 1e-3,
        });
        let v = s.terminal_cost(&[1.0, 1.0], &[0.0, 0.0], &[1.0, 1.0], &[]).unwrap();
        assert_abs_diff_eq!(v, 0.75 / 1e-3, epsilon = 1e-9);
    }

    #[test]
    fn angle_errors_wrap() {
        use std::f64::consts::PI;
        let s = CostSpec::diagonal(vec![0.0, 1.0], vec![0.0], vec![0.0, 0.0], vec![0.0, PI]);
        let near = s.stage_cost(&[0.0, 3.0 * PI - 0.1], &[0.0], &[0.0, PI], &[1]).unwrap();
        assert_abs_diff_eq!(near, 0.01, epsilon = 1e-12);
    }

    #[test]
    fn dense_weights_are_checked() {
        let ok = WeightMatrix::Dense(vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        ok.validate("q", 2).unwrap();
        assert_abs_diff_eq!(ok.quad_form(&[1.0, 1.0]), 6.0, epsilon = 1e-15);
        let asym = WeightMatrix::Dense(vec![vec![2.0, 1.0], vec![0.0, 2.0]]);
        assert!(asym.validate("q", 2).is_err());
        let indefinite = WeightMatrix::Dense(vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(indefinite.validate("q", 2).is_err());
        assert!(WeightMatrix::Diagonal(vec![1.0, -1.0]).validate("q", 2).is_err());
        assert!(WeightMatrix::identity(3).validate("q", 2).is_err());
    }

    #[test]
    fn track_references_advance_along_centerline() {
        let spec = CostSpec {
            q: WeightMatrix::identity(5),
            r: WeightMatrix::identity(2),
            q_terminal: WeightMatrix::identity(5),
            goal: Goal::Track {
                track: TrackGeometry::default(),
                reference_speed: 2.0,
            },
            terminal_reward: None,
        };
        spec.validate(5, 2).unwrap();
        let refs = spec.references(&[-2.5, -2.0, 0.0, 0.0, 0.0], 3, 0.1);
        assert_eq!(refs.len(), 4);
        assert_abs_diff_eq!(refs[0][0], -2.3, epsilon = 1e-12);
        assert_abs_diff_eq!(refs[3][0], -1.7, epsilon = 1e-12);
        assert_eq!(refs[3][3], 2.0);
    }
}
