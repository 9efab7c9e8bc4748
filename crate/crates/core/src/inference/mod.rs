//! Particle inference over latent dynamics parameters: kernels, the SVGD
//! update, the task-dependent posterior score and the KSD diagnostic.

mod kernel;
mod ksd;
mod particles;
mod svgd;

pub use kernel::KernelSpec;
pub use ksd::ksd_estimate;
pub use particles::{particle_mean, ParamBox, ParticleSet};
pub use svgd::{posterior_score, svgd_step, svgd_step_with, PosteriorModel, SignMode, SvgdConfig};

pub(crate) use ksd::ksd_from_scores;
pub(crate) use svgd::{particle_scores, update_from_scores};
