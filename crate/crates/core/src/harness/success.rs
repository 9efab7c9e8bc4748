use serde::{Deserialize, Serialize};

use crate::envs::wrap_angle;
use crate::error::{Error, Result};

/// Task completion test, one variant per environment family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SuccessCriterion {
    /// Pole within `angle_tol` of upright and spinning slower than
    /// `rate_tol`, continuously for `hold` seconds.
    Cartpole { angle_tol: f64, rate_tol: f64, hold: f64 },
    /// Rocket on the pad, upright and slow, all at once.
    Rocket {
        pad: [f64; 2],
        pad_half_width: f64,
        altitude_tol: f64,
        upright_tol: f64,
        speed_tol: f64,
    },
    /// Unwrapped lap progress at least `lap_fraction`.
    Racing { lap_fraction: f64 },
    /// Euclidean distance of the full state to `target` below `tol`.
    Region { target: Vec<f64>, tol: f64 },
}

impl SuccessCriterion {
    pub fn cartpole_default() -> Self {
        SuccessCriterion::Cartpole {
            angle_tol: 0.2,
            rate_tol: 1.0,
            hold: 0.5,
        }
    }

    pub fn rocket_default() -> Self {
        SuccessCriterion::Rocket {
            pad: [0.5, 0.0],
            pad_half_width: 0.1,
            altitude_tol: 0.05,
            upright_tol: 0.15,
            speed_tol: 0.2,
        }
    }

    pub fn racing_default() -> Self {
        SuccessCriterion::Racing { lap_fraction: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("harness.success.{name}"), format!("must be positive, got {v}")))
            }
        };
        match self {
            SuccessCriterion::Cartpole { angle_tol, rate_tol, hold } => {
                positive("angle_tol", *angle_tol)?;
                positive("rate_tol", *rate_tol)?;
                if !(*hold >= 0.0) {
                    return Err(Error::config("harness.success.hold", "must be nonnegative"));
                }
                Ok(())
            }
            SuccessCriterion::Rocket {
                pad_half_width,
                altitude_tol,
                upright_tol,
                speed_tol,
                ..
            } => {
                positive("pad_half_width", *pad_half_width)?;
                positive("altitude_tol", *altitude_tol)?;
                positive("upright_tol", *upright_tol)?;
                positive("speed_tol", *speed_tol)
            }
            SuccessCriterion::Racing { lap_fraction } => positive("lap_fraction", *lap_fraction),
            SuccessCriterion::Region { tol, .. } => positive("tol", *tol),
        }
    }

    fn holds_at(&self, sample: &SuccessSample<'_>) -> bool {
        let x = sample.state;
        match self {
            SuccessCriterion::Cartpole { angle_tol, rate_tol, .. } => {
                wrap_angle(x[1] - std::f64::consts::PI).abs() < *angle_tol && x[3].abs() < *rate_tol
            }
            SuccessCriterion::Rocket {
                pad,
                pad_half_width,
                altitude_tol,
                upright_tol,
                speed_tol,
            } => {
                (x[0] - pad[0]).abs() < *pad_half_width
                    && (x[1] - pad[1]).abs() < *altitude_tol
                    && wrap_angle(x[2]).abs() < *upright_tol
                    && x[3].hypot(x[4]) < *speed_tol
            }
            SuccessCriterion::Racing { lap_fraction } => sample.progress.is_some_and(|p| p >= *lap_fraction),
            SuccessCriterion::Region { target, tol } => {
                x.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() < *tol
            }
        }
    }
}

/// One logged instant as seen by the success test.
#[derive(Debug, Clone, Copy)]
pub struct SuccessSample<'a> {
    pub t: f64,
    pub state: &'a [f64],
    /// Unwrapped lap progress, when the task has a track.
    pub progress: Option<f64>,
}

/// Whether the task counts as complete at the last sample of `suffix`.
///
/// Only the cartpole criterion looks further back than the last sample: the
/// trailing run of in-tolerance samples must span at least `hold` seconds.
pub fn check_success(criterion: &SuccessCriterion, suffix: &[SuccessSample<'_>]) -> bool {
    let Some(last) = suffix.last() else {
        return false;
    };
    match criterion {
        SuccessCriterion::Cartpole { hold, .. } => {
            let mut start = None;
            for s in suffix.iter().rev() {
                if !criterion.holds_at(s) {
                    break;
                }
                start = Some(s.t);
                if last.t - s.t >= *hold {
                    return true;
                }
            }
            start.is_some_and(|t0| last.t - t0 >= *hold)
        }
        _ => criterion.holds_at(last),
    }
}
