//! Control sequences, the path-integral sampler and the planner variants.

mod mppi;
mod variant;

pub use mppi::{mppi_solve, mppi_solve_with, MppiConfig, MppiSolution};
pub use variant::{plan, ControllerVariant, VariantName};

use crate::error::{Error, Result};

/// Horizon-length control sequence, stored row-major (`horizon x control_dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPlan {
    data: Vec<f64>,
    horizon: usize,
    control_dim: usize,
}

impl ControlPlan {
    pub fn zeros(horizon: usize, control_dim: usize) -> Self {
        ControlPlan {
            data: vec![0.0; horizon * control_dim],
            horizon,
            control_dim,
        }
    }

    /// Every step set to `u`.
    pub fn constant(horizon: usize, u: &[f64]) -> Self {
        ControlPlan {
            data: u.repeat(horizon),
            horizon,
            control_dim: u.len(),
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let control_dim = rows.first().map_or(0, Vec::len);
        if control_dim == 0 {
            return Err(Error::config("plan", "need at least one control step with one channel"));
        }
        let horizon = rows.len();
        let mut data = Vec::with_capacity(horizon * control_dim);
        for row in rows {
            crate::error::check_dim("plan row", control_dim, row.len())?;
            data.extend(row);
        }
        Ok(ControlPlan {
            data,
            horizon,
            control_dim,
        })
    }

    pub(crate) fn from_flat(data: Vec<f64>, horizon: usize, control_dim: usize) -> Self {
        debug_assert_eq!(data.len(), horizon * control_dim);
        ControlPlan {
            data,
            horizon,
            control_dim,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn control_dim(&self) -> usize {
        self.control_dim
    }

    pub fn control(&self, t: usize) -> &[f64] {
        &self.data[t * self.control_dim..(t + 1) * self.control_dim]
    }

    /// First control, the one applied in a receding-horizon loop.
    pub fn first(&self) -> &[f64] {
        self.control(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on zero chunk size
        self.data.chunks_exact(self.control_dim.max(1))
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_flat_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    pub fn clamp_to(&mut self, bounds: &[(f64, f64)]) {
        let m = self.control_dim;
        for row in self.data.chunks_exact_mut(m.max(1)) {
            for (v, (lo, hi)) in row.iter_mut().zip(bounds) {
                *v = v.clamp(*lo, *hi);
            }
        }
    }

    pub fn within(&self, bounds: &[(f64, f64)]) -> bool {
        self.iter()
            .all(|row| row.iter().zip(bounds).all(|(v, (lo, hi))| *lo <= *v && *v <= *hi))
    }
}

/// Drops the first control and repeats the last one.
pub fn shift_warm_start(plan: &ControlPlan) -> ControlPlan {
    let m = plan.control_dim;
    if plan.horizon == 0 {
        return plan.clone();
    }
    let mut data = Vec::with_capacity(plan.data.len());
    data.extend_from_slice(&plan.data[m..]);
    data.extend_from_slice(plan.control(plan.horizon - 1));
    ControlPlan::from_flat(data, plan.horizon, m)
}
