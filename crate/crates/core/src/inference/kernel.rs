//! Positive definite kernels over parameter space.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Kernel used by the particle flow.
///
/// `Rbf` is `exp(-|a-b|^2 / h)`, `Imq` is `(psi^2 + |a-b|^2)^(-zeta)`, and
/// `Constant` is identically one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Rbf {
        bandwidth: f64,
    },
    Imq {
        bandwidth: f64,
        decay: f64,
    },
    Constant,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Rbf { bandwidth: 1.0 }
    }
}

impl KernelSpec {
    pub fn imq_default() -> Self {
        KernelSpec::Imq {
            bandwidth: 1.0,
            decay: 0.5,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Rbf { .. } => "rbf",
            KernelSpec::Imq { .. } => "imq",
            KernelSpec::Constant => "constant",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(
                    format!("svgd.kernel.{field}"),
                    format!("must be positive and finite, got {v}"),
                ))
            }
        };
        match *self {
            KernelSpec::Rbf { bandwidth } => positive("bandwidth", bandwidth),
            KernelSpec::Imq { bandwidth, decay } => {
                positive("bandwidth", bandwidth)?;
                positive("decay", decay)
            }
            KernelSpec::Constant => Ok(()),
        }
    }

    /// `k(a, b)`.
    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        check_dim("kernel_eval", a.len(), b.len())?;
        Ok(self.eval_sq(sq_dist(a, b)))
    }

    /// Gradient of `k(a, b)` with respect to `a`.
    pub fn grad(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        check_dim("kernel_grad", a.len(), b.len())?;
        let mut out = vec![0.0; a.len()];
        self.grad_into(a, b, &mut out);
        Ok(out)
    }

    pub(crate) fn eval_sq(&self, r2: f64) -> f64 {
        match *self {
            KernelSpec::Rbf { bandwidth } => (-r2 / bandwidth).exp(),
            KernelSpec::Imq { bandwidth, decay } => (bandwidth * bandwidth + r2).powf(-decay),
            KernelSpec::Constant => 1.0,
        }
    }

    /// Scalar `c` such that `grad_a k(a, b) = c * (a - b)`.
    pub(crate) fn grad_coeff(&self, r2: f64) -> f64 {
        match *self {
            KernelSpec::Rbf { bandwidth } => -2.0 / bandwidth * (-r2 / bandwidth).exp(),
            KernelSpec::Imq { bandwidth, decay } => {
                -2.0 * decay * (bandwidth * bandwidth + r2).powf(-decay - 1.0)
            }
            KernelSpec::Constant => 0.0,
        }
    }

    pub(crate) fn grad_into(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        let c = self.grad_coeff(sq_dist(a, b));
        for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
            *o = c * (x - y);
        }
    }

    /// `sum_k d^2 k / (da_k db_k)` for inputs of dimension `dim` at squared
    /// distance `r2`.
    pub(crate) fn mixed_trace(&self, r2: f64, dim: usize) -> f64 {
        let d = dim as f64;
        match *self {
            KernelSpec::Rbf { bandwidth } => {
                let k = (-r2 / bandwidth).exp();
                (2.0 * d / bandwidth - 4.0 * r2 / (bandwidth * bandwidth)) * k
            }
            KernelSpec::Imq { bandwidth, decay } => {
                let c = bandwidth * bandwidth + r2;
                2.0 * decay * d * c.powf(-decay - 1.0)
                    - 4.0 * decay * (decay + 1.0) * r2 * c.powf(-decay - 2.0)
            }
            KernelSpec::Constant => 0.0,
        }
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
