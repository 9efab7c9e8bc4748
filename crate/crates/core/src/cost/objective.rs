use super::CostSpec;
use crate::control::ControlPlan;
use crate::envs::{EnvModel, MAX_STATE_DIM};
use crate::error::{check_dim, Error, Result};
use crate::inference::ParticleSet;

/// Shooting objective for one planning cycle: start state, horizon references
/// and the environment are fixed, plans and parameters vary.
///
/// Dynamics are enforced by forward simulation, so the equality-constraint
/// term of the Lagrangian vanishes and the Lagrangian equals the trajectory
/// cost.
#[derive(Debug, Clone)]
pub struct TrajectoryObjective<'a> {
    env: &'a EnvModel,
    spec: &'a CostSpec,
    x0: Vec<f64>,
    refs: Vec<Vec<f64>>,
}

impl<'a> TrajectoryObjective<'a> {
    pub fn new(spec: &'a CostSpec, env: &'a EnvModel, x0: &[f64], horizon: usize) -> Result<Self> {
        check_dim("objective start state", env.state_dim(), x0.len())?;
        check_dim("objective state weights", env.state_dim(), spec.q.dim())?;
        check_dim("objective control weights", env.control_dim(), spec.r.dim())?;
        Ok(TrajectoryObjective {
            env,
            spec,
            x0: x0.to_vec(),
            refs: spec.references(x0, horizon, env.dt),
        })
    }

    pub fn horizon(&self) -> usize {
        self.refs.len() - 1
    }

    pub fn env(&self) -> &EnvModel {
        self.env
    }

    /// Sum of stage costs along the rollout plus the terminal cost.
    pub fn cost(&self, plan: &ControlPlan, theta: &[f64]) -> Result<f64> {
        check_dim("plan horizon", self.horizon(), plan.horizon())?;
        check_dim("plan control", self.env.control_dim(), plan.control_dim())?;
        check_dim("theta", self.env.param_dim(), theta.len())?;
        let n = self.x0.len();
        let angles = self.env.name.angle_indices();
        let mut x = [0.0; MAX_STATE_DIM];
        let mut next = [0.0; MAX_STATE_DIM];
        x[..n].copy_from_slice(&self.x0);
        let mut total = 0.0;
        for (t, u) in plan.iter().enumerate() {
            total += self.spec.stage_unchecked(&x[..n], u, &self.refs[t], angles);
            self.env.step_into(&x[..n], u, theta, &mut next[..n])?;
            x[..n].copy_from_slice(&next[..n]);
        }
        total += self.spec.terminal_unchecked(&x[..n], &self.refs[self.horizon()], &self.x0, angles);
        Ok(total)
    }

    /// `cost(theta) - cost(theta_ref)`.
    pub fn gap(&self, plan: &ControlPlan, theta: &[f64], theta_ref: &[f64]) -> Result<f64> {
        Ok(self.cost(plan, theta)? - self.cost(plan, theta_ref)?)
    }

    /// Cost under every particle, in particle order.
    pub fn particle_costs(&self, plan: &ControlPlan, particles: &ParticleSet) -> Result<Vec<f64>> {
        particles.iter().map(|p| self.cost(plan, p)).collect()
    }

    /// `L(theta_bar) + gamma * mean_i [L(theta_i) - L(theta_bar)]` using
    /// exactly `N + 1` rollouts.
    pub fn robust(&self, plan: &ControlPlan, particles: &ParticleSet, gamma: f64) -> Result<f64> {
        let at_mean = self.cost(plan, &particles.mean())?;
        let costs = self.particle_costs(plan, particles)?;
        Ok(robust_from_costs(at_mean, &costs, gamma))
    }

    /// `lambda * epsilon + lambda * log mean_i exp(L(theta_i) / lambda)`.
    pub fn dro(&self, plan: &ControlPlan, particles: &ParticleSet, lambda: f64, epsilon: f64) -> Result<f64> {
        let costs = self.particle_costs(plan, particles)?;
        dro_from_costs(&costs, lambda, epsilon)
    }
}

/// Gap-weighted robust aggregate from precomputed costs.
pub fn robust_from_costs(at_mean: f64, costs: &[f64], gamma: f64) -> f64 {
    let n = costs.len() as f64;
    let mean_gap = costs.iter().map(|c| c - at_mean).sum::<f64>() / n;
    at_mean + gamma * mean_gap
}

/// Entropic risk with ambiguity offset, evaluated with a max-shifted
/// log-sum-exp.
pub fn dro_from_costs(costs: &[f64], lambda: f64, epsilon: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::config("controller.dro_lambda", format!("must be positive, got {lambda}")));
    }
    if costs.is_empty() {
        return Err(Error::config("particles", "need at least one particle"));
    }
    let max = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n = costs.len() as f64;
    let sum: f64 = costs.iter().map(|c| ((c - max) / lambda).exp()).sum();
    Ok(lambda * epsilon + max + lambda * (sum / n).ln())
}

pub fn trajectory_cost(spec: &CostSpec, env: &EnvModel, x0: &[f64], plan: &ControlPlan, theta: &[f64]) -> Result<f64> {
    TrajectoryObjective::new(spec, env, x0, plan.horizon())?.cost(plan, theta)
}

pub fn optimality_gap(
    spec: &CostSpec,
    env: &EnvModel,
    x0: &[f64],
    plan: &ControlPlan,
    theta: &[f64],
    theta_ref: &[f64],
) -> Result<f64> {
    TrajectoryObjective::new(spec, env, x0, plan.horizon())?.gap(plan, theta, theta_ref)
}

pub fn robust_cost(
    spec: &CostSpec,
    env: &EnvModel,
    x0: &[f64],
    plan: &ControlPlan,
    particles: &ParticleSet,
    gamma: f64,
) -> Result<f64> {
    TrajectoryObjective::new(spec, env, x0, plan.horizon())?.robust(plan, particles, gamma)
}

pub fn dro_risk_cost(
    spec: &CostSpec,
    env: &EnvModel,
    x0: &[f64],
    plan: &ControlPlan,
    particles: &ParticleSet,
    lambda: f64,
    epsilon: f64,
) -> Result<f64> {
    TrajectoryObjective::new(spec, env, x0, plan.horizon())?.dro(plan, particles, lambda, epsilon)
}
