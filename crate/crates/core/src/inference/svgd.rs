//! Stein variational particle flow over latent parameters.

use serde::{Deserialize, Serialize};

use super::kernel::{sq_dist, KernelSpec};
use super::particles::{ParamBox, ParticleSet};
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Sign applied to the gap inside the Boltzmann posterior `exp(s * gap) * prior`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    /// `s = +1`: particles drift toward parameters that raise the plan's cost.
    #[default]
    Adversarial,
    /// `s = -1`: particles drift toward parameters that lower it.
    Favoring,
}

impl SignMode {
    pub fn sign(self) -> f64 {
        match self {
            SignMode::Adversarial => 1.0,
            SignMode::Favoring => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvgdConfig {
    /// Step size `alpha`.
    pub step_size: f64,
    /// Iterations applied per environment step.
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Finite-difference step, as a fraction of each parameter's box width.
    #[serde(default = "default_fd_epsilon")]
    pub fd_epsilon: f64,
    #[serde(default)]
    pub sign_mode: SignMode,
    #[serde(default)]
    pub kernel: KernelSpec,
}

fn default_iterations() -> usize {
    1
}

fn default_fd_epsilon() -> f64 {
    1e-4
}

impl Default for SvgdConfig {
    fn default() -> Self {
        SvgdConfig {
            step_size: 1e-3,
            iterations: 1,
            fd_epsilon: 1e-4,
            sign_mode: SignMode::Adversarial,
            kernel: KernelSpec::default(),
        }
    }
}

impl SvgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::config(
                "svgd.step_size",
                format!("must be positive, got {}", self.step_size),
            ));
        }
        if self.iterations == 0 {
            return Err(Error::config("svgd.iterations", "must be at least 1"));
        }
        if !(self.fd_epsilon > 0.0 && self.fd_epsilon.is_finite()) {
            return Err(Error::config(
                "svgd.fd_epsilon",
                format!("must be positive, got {}", self.fd_epsilon),
            ));
        }
        self.kernel.validate()
    }
}

/// Task-dependent posterior `exp(s * gap(theta)) * U(prior)`.
///
/// `gap` returns the optimality gap of the current plan under `theta`. The
/// uniform prior has zero score strictly inside its support.
pub struct PosteriorModel<G> {
    pub prior: ParamBox,
    gap: G,
}

impl<G> PosteriorModel<G>
where
    G: Fn(&[f64]) -> Result<f64> + Sync,
{
    pub fn new(prior: ParamBox, gap: G) -> Self {
        PosteriorModel { prior, gap }
    }

    /// Evaluates the gap, mapping non-finite values to an evaluation error.
    pub fn gap(&self, theta: &[f64]) -> Result<f64> {
        let v = (self.gap)(theta)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                theta: theta.to_vec(),
            })
        }
    }
}

/// Score of the posterior, `s * grad gap(theta) + grad log prior(theta)`.
///
/// The gap gradient is a central difference with step `fd_epsilon * width`
/// per coordinate, falling back to a one-sided difference where the central
/// stencil would leave the prior box.
pub fn posterior_score<G>(theta: &[f64], model: &PosteriorModel<G>, config: &SvgdConfig) -> Result<Vec<f64>>
where
    G: Fn(&[f64]) -> Result<f64> + Sync,
{
    crate::error::check_dim("posterior_score", model.prior.dim(), theta.len())?;
    let mut base = theta.to_vec();
    model.prior.clamp_in_place(&mut base);
    let sign = config.sign_mode.sign();
    let mut center: Option<f64> = None;
    let mut probe = base.clone();
    let mut score = Vec::with_capacity(base.len());
    for i in 0..base.len() {
        let h = config.fd_epsilon * model.prior.width(i);
        let (lo, hi) = (model.prior.lower[i], model.prior.upper[i]);
        let up = base[i] + h <= hi;
        let down = base[i] - h >= lo;
        let grad = match (down, up) {
            (true, true) => {
                probe[i] = base[i] + h;
                let fp = model.gap(&probe)?;
                probe[i] = base[i] - h;
                let fm = model.gap(&probe)?;
                (fp - fm) / (2.0 * h)
            }
            (false, true) => {
                let f0 = match center {
                    Some(v) => v,
                    None => *center.insert(model.gap(&base)?),
                };
                probe[i] = base[i] + h;
                (model.gap(&probe)? - f0) / h
            }
            (true, false) => {
                let f0 = match center {
                    Some(v) => v,
                    None => *center.insert(model.gap(&base)?),
                };
                probe[i] = base[i] - h;
                (f0 - model.gap(&probe)?) / h
            }
            // Box narrower than the stencil: no usable difference.
            (false, false) => 0.0,
        };
        probe[i] = base[i];
        score.push(sign * grad);
    }
    Ok(score)
}

/// One SVGD iteration.
///
/// Each particle moves by `alpha * (1/N) sum_j [k(theta_j, theta_i) s_j +
/// grad_1 k(theta_j, theta_i)]` and is clamped back into the box. With the
/// constant kernel the interaction terms carry no information, so the update
/// is taken as independent per-particle gradient ascent `theta_i + alpha s_i`.
pub fn svgd_step<G>(
    particles: &ParticleSet,
    model: &PosteriorModel<G>,
    kernel: &KernelSpec,
    config: &SvgdConfig,
) -> Result<ParticleSet>
where
    G: Fn(&[f64]) -> Result<f64> + Sync,
{
    svgd_step_with(Exec::default(), particles, model, kernel, config)
}

pub fn svgd_step_with<G>(
    exec: Exec,
    particles: &ParticleSet,
    model: &PosteriorModel<G>,
    kernel: &KernelSpec,
    config: &SvgdConfig,
) -> Result<ParticleSet>
where
    G: Fn(&[f64]) -> Result<f64> + Sync,
{
    let scores = particle_scores(exec, particles, model, config)?;
    Ok(update_from_scores(particles, &scores, kernel, config.step_size))
}

/// Posterior scores for every particle, in particle order.
pub(crate) fn particle_scores<G>(
    exec: Exec,
    particles: &ParticleSet,
    model: &PosteriorModel<G>,
    config: &SvgdConfig,
) -> Result<Vec<Vec<f64>>>
where
    G: Fn(&[f64]) -> Result<f64> + Sync,
{
    exec.map(particles.len(), |i| posterior_score(particles.particle(i), model, config))
        .into_iter()
        .collect()
}

pub(crate) fn update_from_scores(particles: &ParticleSet, scores: &[Vec<f64>], kernel: &KernelSpec, alpha: f64) -> ParticleSet {
    let n = particles.len();
    let d = particles.dim();
    let mut next = Vec::with_capacity(n * d);
    if let KernelSpec::Constant = kernel {
        for (theta, s) in particles.iter().zip(scores) {
            next.extend(theta.iter().zip(s).map(|(t, g)| t + alpha * g));
        }
        return particles.with_flat(next);
    }

    let inv_n = 1.0 / n as f64;
    let mut phi = vec![0.0; d];
    for theta_i in particles.iter() {
        phi.iter_mut().for_each(|v| *v = 0.0);
        for (theta_j, s_j) in particles.iter().zip(scores) {
            let r2 = sq_dist(theta_j, theta_i);
            let k = kernel.eval_sq(r2);
            let c = kernel.grad_coeff(r2);
            for m in 0..d {
                phi[m] += k * s_j[m] + c * (theta_j[m] - theta_i[m]);
            }
        }
        next.extend(theta_i.iter().zip(&phi).map(|(t, p)| t + alpha * inv_n * p));
    }
    particles.with_flat(next)
}
