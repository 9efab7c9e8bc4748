//! Path-integral sampling optimizer over control sequences.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ControlPlan;
use crate::envs::EnvModel;
use crate::error::{Error, Result};
use crate::exec::{mix_seed, Exec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MppiConfig {
    /// Candidates per iteration, the warm start included.
    #[serde(default = "default_samples")]
    pub num_samples: usize,
    /// Per-channel perturbation std; defaults to 10% of each control range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_std: Option<Vec<f64>>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
}

fn default_samples() -> usize {
    512
}

fn default_temperature() -> f64 {
    1.0
}

fn default_iterations() -> usize {
    1
}

impl Default for MppiConfig {
    fn default() -> Self {
        MppiConfig {
            num_samples: default_samples(),
            noise_std: None,
            temperature: default_temperature(),
            iterations: default_iterations(),
        }
    }
}

impl MppiConfig {
    pub fn noise_for(&self, env: &EnvModel) -> Vec<f64> {
        match &self.noise_std {
            Some(s) => s.clone(),
            None => env.control_bounds.iter().map(|(lo, hi)| 0.1 * (hi - lo)).collect(),
        }
    }

    pub fn validate(&self, env: &EnvModel) -> Result<()> {
        if self.num_samples == 0 {
            return Err(Error::config("mppi.num_samples", "must be at least 1"));
        }
        if self.iterations == 0 {
            return Err(Error::config("mppi.iterations", "must be at least 1"));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::config("mppi.temperature", "must be positive"));
        }
        let noise = self.noise_for(env);
        if noise.len() != env.control_dim() {
            return Err(Error::config(
                "mppi.noise_std",
                format!("need {} entries", env.control_dim()),
            ));
        }
        if noise.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::config("mppi.noise_std", "entries must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MppiSolution {
    pub plan: ControlPlan,
    /// Objective value of `plan`.
    pub cost: f64,
}

pub fn mppi_solve<F>(env: &EnvModel, warm: &ControlPlan, objective: F, config: &MppiConfig, seed: u64) -> Result<MppiSolution>
where
    F: Fn(&ControlPlan) -> Result<f64> + Sync,
{
    mppi_solve_with(Exec::default(), env, warm, objective, config, seed)
}

/// Samples `K - 1` Gaussian perturbations of the warm plan (candidate 0 is the
/// warm plan itself), clamps them to the control box, and averages them with
/// weights `exp(-(J - J_min) / temperature)`.
///
/// The averaged plan is returned unless the best sampled candidate scores
/// lower, which keeps every iteration monotone with respect to the warm
/// start. Candidate `k` draws its noise from its own substream of `seed`, so
/// the result does not depend on `exec`.
pub fn mppi_solve_with<F>(
    exec: Exec,
    env: &EnvModel,
    warm: &ControlPlan,
    objective: F,
    config: &MppiConfig,
    seed: u64,
) -> Result<MppiSolution>
where
    F: Fn(&ControlPlan) -> Result<f64> + Sync,
{
    let noise = config.noise_for(env);
    let (horizon, m) = (warm.horizon(), warm.control_dim());
    crate::error::check_dim("mppi warm start", env.control_dim(), m)?;

    let mut current = warm.clone();
    current.clamp_to(&env.control_bounds);
    let mut current_cost = f64::INFINITY;

    for iter in 0..config.iterations {
        let iter_seed = mix_seed(seed, iter as u64);
        let candidates = exec.map(config.num_samples, |k| {
            let mut cand = current.clone();
            if k > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(iter_seed, k as u64));
                for (i, v) in cand.as_flat_mut().iter_mut().enumerate() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *v += noise[i % m] * z;
                }
                cand.clamp_to(&env.control_bounds);
            }
            let cost = match objective(&cand) {
                Ok(c) if c.is_finite() => c,
                _ => f64::INFINITY,
            };
            (cand, cost)
        });

        let (best_idx, best_cost) = candidates
            .iter()
            .enumerate()
            .map(|(i, (_, c))| (i, *c))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        if !best_cost.is_finite() {
            return Err(Error::SolverFailure(format!(
                "objective non-finite for all {} candidates",
                config.num_samples
            )));
        }

        // Weighted mean of the perturbations, added back onto the current plan.
        let mut delta = vec![0.0; horizon * m];
        let mut total_w = 0.0;
        for (cand, cost) in &candidates {
            let w = (-(cost - best_cost) / config.temperature).exp();
            if w > 0.0 {
                total_w += w;
                for ((d, v), c) in delta.iter_mut().zip(cand.as_flat()).zip(current.as_flat()) {
                    *d += w * (v - c);
                }
            }
        }
        let avg = current
            .as_flat()
            .iter()
            .zip(&delta)
            .map(|(c, d)| c + d / total_w)
            .collect();
        let mut averaged = ControlPlan::from_flat(avg, horizon, m);
        averaged.clamp_to(&env.control_bounds);
        let averaged_cost = match objective(&averaged) {
            Ok(c) if c.is_finite() => c,
            _ => f64::INFINITY,
        };

        if averaged_cost <= best_cost {
            current = averaged;
            current_cost = averaged_cost;
        } else {
            current = candidates[best_idx].0.clone();
            current_cost = best_cost;
        }
    }

    Ok(MppiSolution {
        plan: current,
        cost: current_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{CostSpec, TrajectoryObjective};
    use crate::envs::presets;

    fn quad_setup() -> (EnvModel, CostSpec) {
        let env = presets::double_integrator(0.1, 2.0);
        let spec = CostSpec::diagonal(vec![1.0, 0.1], vec![0.01], vec![5.0, 1.0], vec![0.0, 0.0]);
        (env, spec)
    }

    #[test]
    fn vanishing_noise_returns_warm_plan() {
        let (env, spec) = quad_setup();
        let obj = TrajectoryObjective::new(&spec, &env, &[1.0, 0.0], 4).unwrap();
        let warm = ControlPlan::from_rows(vec![vec![0.3], vec![-0.1], vec![0.0], vec![0.5]]).unwrap();
        let cfg = MppiConfig {
            num_samples: 32,
            noise_std: Some(vec![1e-300]),
            ..MppiConfig::default()
        };
        let sol = mppi_solve(&env, &warm, |p| obj.cost(p, &[0.0]), &cfg, 3).unwrap();
        for (a, b) in sol.plan.as_flat().iter().zip(warm.as_flat()) {
            assert!((a - b).abs() < 1e-200);
        }
    }

    #[test]
    fn single_sample_returns_the_clamped_warm_plan() {
        let (env, spec) = quad_setup();
        let obj = TrajectoryObjective::new(&spec, &env, &[1.0, 0.0], 2).unwrap();
        let warm = ControlPlan::from_rows(vec![vec![5.0], vec![-0.4]]).unwrap();
        let cfg = MppiConfig {
            num_samples: 1,
            ..MppiConfig::default()
        };
        let sol = mppi_solve(&env, &warm, |p| obj.cost(p, &[0.0]), &cfg, 3).unwrap();
        assert_eq!(sol.plan.to_rows(), vec![vec![2.0], vec![-0.4]]);
    }

    #[test]
    fn never_worse_than_warm_and_within_bounds() {
        let (env, spec) = quad_setup();
        let obj = TrajectoryObjective::new(&spec, &env, &[1.0, 0.0], 5).unwrap();
        let warm = ControlPlan::zeros(5, 1);
        let warm_cost = obj.cost(&warm, &[0.0]).unwrap();
        for seed in 0..10 {
            let cfg = MppiConfig {
                num_samples: 16,
                noise_std: Some(vec![3.0]),
                temperature: 0.5,
                iterations: 2,
            };
            let sol = mppi_solve(&env, &warm, |p| obj.cost(p, &[0.0]), &cfg, seed).unwrap();
            assert!(sol.cost <= warm_cost);
            assert!(sol.plan.within(&env.control_bounds));
            assert_eq!(sol.cost, obj.cost(&sol.plan, &[0.0]).unwrap());
        }
    }

    #[test]
    fn all_failing_candidates_is_a_solver_failure() {
        let (env, _) = quad_setup();
        let warm = ControlPlan::zeros(3, 1);
        let cfg = MppiConfig {
            num_samples: 8,
            ..MppiConfig::default()
        };
        let r = mppi_solve(&env, &warm, |_| Ok(f64::NAN), &cfg, 0);
        assert!(matches!(r, Err(Error::SolverFailure(_))));
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let (env, spec) = quad_setup();
        let obj = TrajectoryObjective::new(&spec, &env, &[1.0, 0.5], 6).unwrap();
        let warm = ControlPlan::zeros(6, 1);
        let cfg = MppiConfig {
            num_samples: 64,
            ..MppiConfig::default()
        };
        let a = mppi_solve_with(Exec::Sequential, &env, &warm, |p| obj.cost(p, &[0.0]), &cfg, 42).unwrap();
        let b = mppi_solve_with(Exec::Parallel, &env, &warm, |p| obj.cost(p, &[0.0]), &cfg, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        let env = presets::rocket2d();
        assert!(MppiConfig::default().validate(&env).is_ok());
        assert_eq!(MppiConfig::default().noise_for(&env), vec![0.5, 0.1]);
        let bad = MppiConfig {
            noise_std: Some(vec![0.1]),
            ..MppiConfig::default()
        };
        assert!(bad.validate(&env).is_err());
        let bad = MppiConfig {
            num_samples: 0,
            ..MppiConfig::default()
        };
        assert!(bad.validate(&env).is_err());
    }
}
