//! Closed receding-horizon loop: plan, apply the first control, advance the
//! true system, update the particles, test for success.

mod batch;
mod success;

pub use batch::{run_batch, BatchStats, BatchSummary};
pub use success::{check_success, SuccessCriterion, SuccessSample};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::{plan, shift_warm_start, ControlPlan, ControllerVariant, MppiConfig, VariantName};
use crate::cost::{CostSpec, Goal, TrajectoryObjective};
use crate::envs::{EnvModel, ProgressTracker};
use crate::error::{Error, Result};
use crate::exec::{mix_seed, Exec};
use crate::inference::{ksd_from_scores, particle_scores, update_from_scores, KernelSpec, ParticleSet, PosteriorModel, SvgdConfig};

/// Which parameter nominal MPC plans with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NominalChoice {
    #[default]
    PriorMidpoint,
    FirstDraw,
    InitialMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    pub variant: VariantName,
    /// Weight on the mean optimality gap (Stein-adaptive planning).
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_particles")]
    pub num_particles: usize,
    /// DRO temperature; when absent it is `dro_lambda_scale` times the nominal
    /// cost of the initial warm start.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dro_lambda: Option<f64>,
    #[serde(default = "default_lambda_scale")]
    pub dro_lambda_scale: f64,
    #[serde(default = "default_dro_epsilon")]
    pub dro_epsilon: f64,
    #[serde(default)]
    pub nominal: NominalChoice,
}

fn default_gamma() -> f64 {
    0.5
}
fn default_particles() -> usize {
    5
}
fn default_lambda_scale() -> f64 {
    10.0
}
fn default_dro_epsilon() -> f64 {
    0.1
}

impl ControllerConfig {
    pub fn new(variant: VariantName) -> Self {
        ControllerConfig {
            variant,
            gamma: default_gamma(),
            num_particles: default_particles(),
            dro_lambda: None,
            dro_lambda_scale: default_lambda_scale(),
            dro_epsilon: default_dro_epsilon(),
            nominal: NominalChoice::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_particles == 0 {
            return Err(Error::config("controller.num_particles", "must be at least 1"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::config("controller.gamma", format!("must be >= 0, got {}", self.gamma)));
        }
        if let Some(l) = self.dro_lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::config("controller.dro_lambda", format!("must be positive, got {l}")));
            }
        }
        if !(self.dro_lambda_scale > 0.0 && self.dro_lambda_scale.is_finite()) {
            return Err(Error::config("controller.dro_lambda_scale", "must be positive"));
        }
        if !(self.dro_epsilon >= 0.0 && self.dro_epsilon.is_finite()) {
            return Err(Error::config("controller.dro_epsilon", "must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessConfig {
    /// Simulated duration `T` in seconds.
    pub duration: f64,
    /// Planning horizon `t_h` in seconds; must be a whole number of steps.
    pub horizon: f64,
    pub success: SuccessCriterion,
    /// Control repeated over the first warm-start plan; zeros when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_control: Option<Vec<f64>>,
    /// Log the kernel Stein discrepancy of the particles each step.
    #[serde(default)]
    pub record_ksd: bool,
}

/// Everything one seeded closed-loop run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    pub env: EnvModel,
    pub cost: CostSpec,
    pub controller: ControllerConfig,
    pub svgd: SvgdConfig,
    #[serde(default)]
    pub mppi: MppiConfig,
    pub harness: HarnessConfig,
    #[serde(default)]
    pub seed: u64,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.cost.validate(self.env.state_dim(), self.env.control_dim())?;
        self.controller.validate()?;
        self.svgd.validate()?;
        self.mppi.validate(&self.env)?;
        self.harness.success.validate()?;
        if !(self.harness.duration > 0.0 && self.harness.duration.is_finite()) {
            return Err(Error::config("harness.duration", "must be positive"));
        }
        self.horizon_steps()?;
        if let Some(u) = &self.harness.initial_control {
            if u.len() != self.env.control_dim() {
                return Err(Error::config(
                    "harness.initial_control",
                    format!("need {} entries", self.env.control_dim()),
                ));
            }
        }
        if matches!(self.harness.success, SuccessCriterion::Racing { .. }) && !matches!(self.cost.goal, Goal::Track { .. }) {
            return Err(Error::config("harness.success", "racing success needs a track goal in cost.goal"));
        }
        Ok(())
    }

    /// `t_h / dt`, required to be an integer (within 1e-9 relative).
    pub fn horizon_steps(&self) -> Result<usize> {
        let ratio = self.harness.horizon / self.env.dt;
        let steps = ratio.round();
        if !(self.harness.horizon > 0.0) || steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::config(
                "harness.horizon",
                format!(
                    "horizon {} s is not a positive whole number of dt = {} s steps",
                    self.harness.horizon, self.env.dt
                ),
            ));
        }
        Ok(steps as usize)
    }

    fn initial_warm(&self, horizon: usize) -> ControlPlan {
        let mut u = self
            .harness
            .initial_control
            .clone()
            .unwrap_or_else(|| vec![0.0; self.env.control_dim()]);
        self.env.clamp_control(&mut u);
        ControlPlan::constant(horizon, &u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalReason {
    Success,
    Timeout,
    SolverFailure,
}

/// One executed environment step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    /// State at `t`, before the control is applied.
    pub state: Vec<f64>,
    pub control: Vec<f64>,
    /// Particles the plan was computed against, row-major.
    pub particles: Vec<f64>,
    /// Objective value of the chosen plan.
    pub cost: f64,
    pub particle_mean: Vec<f64>,
    /// Lap progress at `t` for track tasks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub progress: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ksd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub seed: u64,
    pub method: VariantName,
    pub success: bool,
    /// Time of first success, else the configured duration.
    pub completion_time: f64,
    pub terminal_reason: TerminalReason,
    pub final_state: Vec<f64>,
    /// Final lap progress for track tasks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_progress: Option<f64>,
    pub steps: Vec<StepRecord>,
}

/// Resolves configuration into a concrete planner for one trial.
fn resolve_variant(config: &TrialConfig, warm: &ControlPlan, nominal: &[f64], horizon: usize) -> Result<ControllerVariant> {
    let c = &config.controller;
    Ok(match c.variant {
        VariantName::SteinAdaptive => ControllerVariant::SteinAdaptive {
            gamma: c.gamma,
            svgd: config.svgd,
        },
        VariantName::Emppi => ControllerVariant::Emppi,
        VariantName::NominalMpc => ControllerVariant::NominalMpc,
        VariantName::Dro => {
            let lambda = match c.dro_lambda {
                Some(l) => l,
                None => {
                    let obj = TrajectoryObjective::new(&config.cost, &config.env, &config.env.initial_state, horizon)?;
                    c.dro_lambda_scale * obj.cost(warm, nominal)?.max(1.0)
                }
            };
            ControllerVariant::Dro {
                lambda,
                epsilon: c.dro_epsilon,
            }
        }
    })
}

/// Runs one seeded closed-loop trial.
pub fn run_trial(config: &TrialConfig) -> Result<TrialResult> {
    run_trial_with(Exec::default(), config)
}

pub fn run_trial_with(exec: Exec, config: &TrialConfig) -> Result<TrialResult> {
    config.validate()?;
    let env = &config.env;
    let horizon = config.horizon_steps()?;
    let dt = env.dt;
    let duration = config.harness.duration;

    let mut particles = initial_particles(config)?;
    let initial_draw = particles.clone();
    let nominal = nominal_params(config, &initial_draw);

    let mut warm = config.initial_warm(horizon);
    let variant = resolve_variant(config, &warm, &nominal, horizon)?;
    let svgd = match &variant {
        ControllerVariant::SteinAdaptive { svgd, .. } => Some(*svgd),
        _ => None,
    };
    let record_ksd = config.harness.record_ksd && !matches!(config.svgd.kernel, KernelSpec::Constant);

    let mut tracker = match &config.cost.goal {
        Goal::Track { track, .. } => Some(ProgressTracker::new(*track)),
        Goal::Fixed(_) => None,
    };

    let mut x = env.initial_state.clone();
    let mut progress = tracker.as_mut().map(|tr| tr.update(x[0], x[1]));
    let mut history: Vec<(f64, Vec<f64>, Option<f64>)> = vec![(0.0, x.clone(), progress)];
    let mut steps = Vec::new();

    let succeeded = |history: &[(f64, Vec<f64>, Option<f64>)]| {
        let samples: Vec<SuccessSample<'_>> = history
            .iter()
            .map(|(t, s, p)| SuccessSample {
                t: *t,
                state: s,
                progress: *p,
            })
            .collect();
        check_success(&config.harness.success, &samples)
    };

    let finish = |success: bool, t: f64, reason, x: Vec<f64>, progress, steps| TrialResult {
        seed: config.seed,
        method: config.controller.variant,
        success,
        completion_time: if success { t } else { duration },
        terminal_reason: reason,
        final_state: x,
        final_progress: progress,
        steps,
    };

    if succeeded(&history) {
        return Ok(finish(true, 0.0, TerminalReason::Success, x, progress, steps));
    }

    let mut k: usize = 0;
    while (k + 1) as f64 * dt <= duration * (1.0 + 1e-12) {
        let t = k as f64 * dt;
        let objective = TrajectoryObjective::new(&config.cost, env, &x, horizon)?;
        let planning_set = match variant {
            ControllerVariant::SteinAdaptive { .. } => &particles,
            _ => &initial_draw,
        };
        let solution = match plan(exec, &variant, &objective, planning_set, &nominal, &warm, &config.mppi, mix_seed(config.seed, k as u64)) {
            Ok(s) => s,
            Err(_) => return Ok(finish(false, t, TerminalReason::SolverFailure, x, progress, steps)),
        };
        let u = solution.plan.first().to_vec();
        let x_next = match env.step(&x, &u, &env.true_params) {
            Ok(v) => v,
            Err(_) => return Ok(finish(false, t, TerminalReason::SolverFailure, x, progress, steps)),
        };

        let mut ksd = None;
        let logged_particles = particles.as_flat().to_vec();
        let logged_mean = particles.mean();
        if let Some(svgd) = &svgd {
            let theta_ref = particles.mean();
            let reference_cost = objective.cost(&solution.plan, &theta_ref)?;
            let model = PosteriorModel::new(env.param_bounds.clone(), |theta: &[f64]| {
                Ok(objective.cost(&solution.plan, theta)? - reference_cost)
            });
            for iter in 0..svgd.iterations {
                let scores = match particle_scores(exec, &particles, &model, svgd) {
                    Ok(s) => s,
                    Err(_) => return Ok(finish(false, t, TerminalReason::SolverFailure, x, progress, steps)),
                };
                if record_ksd && iter == 0 {
                    ksd = Some(ksd_from_scores(&particles, &scores, &svgd.kernel));
                }
                particles = update_from_scores(&particles, &scores, &svgd.kernel, svgd.step_size);
            }
        }

        steps.push(StepRecord {
            t,
            state: std::mem::replace(&mut x, x_next),
            control: u,
            particles: logged_particles,
            cost: solution.cost,
            particle_mean: logged_mean,
            progress,
            ksd,
        });
        k += 1;
        let t_next = k as f64 * dt;
        progress = tracker.as_mut().map(|tr| tr.update(x[0], x[1]));
        history.push((t_next, x.clone(), progress));
        if history.len() > 4096 {
            history.drain(..2048);
        }
        if succeeded(&history) {
            return Ok(finish(true, t_next, TerminalReason::Success, x, progress, steps));
        }
        warm = shift_warm_start(&solution.plan);
    }

    Ok(finish(false, duration, TerminalReason::Timeout, x, progress, steps))
}

/// Planner a config resolves to at trial start (DRO temperature included).
pub fn resolved_variant(config: &TrialConfig) -> Result<ControllerVariant> {
    let horizon = config.horizon_steps()?;
    let draw = initial_particles(config)?;
    resolve_variant(config, &config.initial_warm(horizon), &nominal_params(config, &draw), horizon)
}

/// Particles drawn from the prior box with the trial seed; every planner
/// variant sees the same draw for a given seed.
pub fn initial_particles(config: &TrialConfig) -> Result<ParticleSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    ParticleSet::sample_uniform(config.controller.num_particles, config.env.param_bounds.clone(), &mut rng)
}

fn nominal_params(config: &TrialConfig, draw: &ParticleSet) -> Vec<f64> {
    match config.controller.nominal {
        NominalChoice::PriorMidpoint => config.env.param_bounds.midpoint(),
        NominalChoice::FirstDraw => draw.particle(0).to_vec(),
        NominalChoice::InitialMean => draw.mean(),
    }
}
