//! Kernel Stein discrepancy, used purely as a convergence diagnostic.

use super::kernel::{sq_dist, KernelSpec};
use super::particles::ParticleSet;
use super::svgd::{posterior_score, PosteriorModel, SvgdConfig};
use crate::error::{Error, Result};

/// V-statistic estimate of the squared KSD between the particle measure and
/// the posterior:
///
/// `(1/N^2) sum_{i,j} [ s_i.s_j k + s_i.grad_2 k + s_j.grad_1 k + tr(grad_1 grad_2 k) ]`.
///
/// Scores come from [`posterior_score`] with `config`'s finite-difference step
/// and sign mode. The constant kernel yields a degenerate Stein kernel and is
/// rejected.
pub fn ksd_estimate<G>(
    particles: &ParticleSet,
    model: &PosteriorModel<G>,
    kernel: &KernelSpec,
    config: &SvgdConfig,
) -> Result<f64>
where
    G: Fn(&[f64]) -> Result<f64> + Sync,
{
    if let KernelSpec::Constant = kernel {
        return Err(Error::UnsupportedKernel("constant"));
    }
    let scores = particles
        .iter()
        .map(|p| posterior_score(p, model, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(ksd_from_scores(particles, &scores, kernel))
}

pub(crate) fn ksd_from_scores(particles: &ParticleSet, scores: &[Vec<f64>], kernel: &KernelSpec) -> f64 {
    let n = particles.len();
    let d = particles.dim();
    let mut total = 0.0;
    for (i, (xi, si)) in particles.iter().zip(scores).enumerate() {
        for j in i..n {
            let (xj, sj) = (particles.particle(j), &scores[j]);
            let r2 = sq_dist(xi, xj);
            let k = kernel.eval_sq(r2);
            let c = kernel.grad_coeff(r2);
            let mut u = kernel.mixed_trace(r2, d);
            for m in 0..d {
                let diff = xi[m] - xj[m];
                // grad_1 k(xi, xj) = c * diff, grad_2 k(xi, xj) = -c * diff
                u += si[m] * sj[m] * k - si[m] * c * diff + sj[m] * c * diff;
            }
            let weight = if i == j { 1.0 } else { 2.0 };
            total += weight * u;
        }
    }
    (total / (n * n) as f64).max(0.0)
}
