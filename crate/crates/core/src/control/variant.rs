use serde::{Deserialize, Serialize};

use super::mppi::{mppi_solve_with, MppiConfig, MppiSolution};
use super::ControlPlan;
use crate::cost::TrajectoryObjective;
use crate::error::Result;
use crate::exec::Exec;
use crate::inference::{ParticleSet, SvgdConfig};

/// Planner identifiers as they appear in configuration files and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    SteinAdaptive,
    Emppi,
    Dro,
    NominalMpc,
}

impl VariantName {
    pub const ALL: [VariantName; 4] = [
        VariantName::SteinAdaptive,
        VariantName::Emppi,
        VariantName::Dro,
        VariantName::NominalMpc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VariantName::SteinAdaptive => "stein_adaptive",
            VariantName::Emppi => "emppi",
            VariantName::Dro => "dro",
            VariantName::NominalMpc => "nominal_mpc",
        }
    }
}

impl std::fmt::Display for VariantName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for VariantName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        VariantName::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown method {s:?}; expected one of stein_adaptive, emppi, dro, nominal_mpc"))
    }
}

/// A fully resolved planner.
#[derive(Debug, Clone, PartialEq)]
pub enum ControllerVariant {
    /// Gap-weighted robust objective over particles that move under SVGD.
    SteinAdaptive { gamma: f64, svgd: SvgdConfig },
    /// Ensemble mean over the particles drawn at trial start.
    Emppi,
    /// Entropic risk over the particles drawn at trial start.
    Dro { lambda: f64, epsilon: f64 },
    /// Single-model MPC at a fixed nominal parameter.
    NominalMpc,
}

impl ControllerVariant {
    pub fn name(&self) -> VariantName {
        match self {
            ControllerVariant::SteinAdaptive { .. } => VariantName::SteinAdaptive,
            ControllerVariant::Emppi => VariantName::Emppi,
            ControllerVariant::Dro { .. } => VariantName::Dro,
            ControllerVariant::NominalMpc => VariantName::NominalMpc,
        }
    }

    /// Scalar objective the variant minimizes for `plan`.
    pub fn objective_value(
        &self,
        objective: &TrajectoryObjective<'_>,
        plan: &ControlPlan,
        particles: &ParticleSet,
        nominal: &[f64],
    ) -> Result<f64> {
        match self {
            ControllerVariant::SteinAdaptive { gamma, .. } => objective.robust(plan, particles, *gamma),
            ControllerVariant::Emppi => objective.robust(plan, particles, 1.0),
            ControllerVariant::Dro { lambda, epsilon } => objective.dro(plan, particles, *lambda, *epsilon),
            ControllerVariant::NominalMpc => objective.cost(plan, nominal),
        }
    }
}

/// Runs the sampler on the variant's objective.
///
/// `particles` must be the set the variant plans against: the live SVGD
/// particles for Stein-adaptive planning, the initial draw for the ensemble
/// and DRO baselines. `nominal` is only read by nominal MPC.
#[allow(clippy::too_many_arguments)]
pub fn plan(
    exec: Exec,
    variant: &ControllerVariant,
    objective: &TrajectoryObjective<'_>,
    particles: &ParticleSet,
    nominal: &[f64],
    warm: &ControlPlan,
    mppi: &MppiConfig,
    seed: u64,
) -> Result<MppiSolution> {
    mppi_solve_with(
        exec,
        objective.env(),
        warm,
        |p| variant.objective_value(objective, p, particles, nominal),
        mppi,
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostSpec;
    use crate::envs::presets;
    use crate::inference::ParamBox;

    fn cartpole_setup() -> (crate::envs::EnvModel, CostSpec) {
        let env = presets::cartpole();
        let spec = CostSpec::diagonal(vec![1.0, 5.0, 0.1, 0.1], vec![0.001], vec![5.0, 20.0, 1.0, 1.0], presets::cartpole_goal());
        (env, spec)
    }

    fn small_mppi() -> MppiConfig {
        MppiConfig {
            num_samples: 32,
            ..MppiConfig::default()
        }
    }

    #[test]
    fn single_particle_stein_equals_nominal() {
        let (env, spec) = cartpole_setup();
        let obj = TrajectoryObjective::new(&spec, &env, &[0.0, 0.3, 0.0, 0.0], 10).unwrap();
        let theta = vec![0.6, 0.8];
        let particles = ParticleSet::from_rows(vec![theta.clone()], env.param_bounds.clone()).unwrap();
        let warm = ControlPlan::zeros(10, 1);
        let stein = ControllerVariant::SteinAdaptive {
            gamma: 0.5,
            svgd: SvgdConfig::default(),
        };
        let a = plan(Exec::default(), &stein, &obj, &particles, &[0.3, 0.3], &warm, &small_mppi(), 9).unwrap();
        let b = plan(Exec::default(), &ControllerVariant::NominalMpc, &obj, &particles, &theta, &warm, &small_mppi(), 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn emppi_equals_stein_with_unit_gamma() {
        let (env, spec) = cartpole_setup();
        let obj = TrajectoryObjective::new(&spec, &env, &[0.0, 0.3, 0.0, 0.0], 10).unwrap();
        let particles = ParticleSet::from_rows(
            vec![vec![0.4, 0.9], vec![0.7, 0.5], vec![0.95, 0.35]],
            ParamBox::new(vec![0.3, 0.3], vec![1.0, 1.0]).unwrap(),
        )
        .unwrap();
        let warm = ControlPlan::zeros(10, 1);
        let stein = ControllerVariant::SteinAdaptive {
            gamma: 1.0,
            svgd: SvgdConfig::default(),
        };
        let a = plan(Exec::default(), &stein, &obj, &particles, &[0.0, 0.0], &warm, &small_mppi(), 4).unwrap();
        let b = plan(Exec::default(), &ControllerVariant::Emppi, &obj, &particles, &[0.0, 0.0], &warm, &small_mppi(), 4).unwrap();
        assert_eq!(a.plan, b.plan);
    }

    #[test]
    fn dro_objective_dominates_ensemble_mean_without_offset() {
        let (env, spec) = cartpole_setup();
        let obj = TrajectoryObjective::new(&spec, &env, &[0.0, 0.0, 0.0, 0.0], 10).unwrap();
        let particles = ParticleSet::from_rows(
            vec![vec![0.4, 0.9], vec![0.7, 0.5], vec![0.95, 0.35]],
            env.param_bounds.clone(),
        )
        .unwrap();
        let p = ControlPlan::constant(10, &[4.0]);
        let dro = ControllerVariant::Dro { lambda: 5.0, epsilon: 0.0 };
        let d = dro.objective_value(&obj, &p, &particles, &[]).unwrap();
        let e = ControllerVariant::Emppi.objective_value(&obj, &p, &particles, &[]).unwrap();
        // shared-rollout recheck
        let costs = obj.particle_costs(&p, &particles).unwrap();
        let mean = costs.iter().sum::<f64>() / 3.0;
        let max = costs.iter().copied().fold(f64::MIN, f64::max);
        let lse = max + 5.0 * (costs.iter().map(|c| ((c - max) / 5.0).exp()).sum::<f64>() / 3.0).ln();
        assert!((d - lse).abs() < 1e-9);
        assert!(d >= e - 1e-12);
        assert!((e - mean).abs() < 1e-9);
    }

    #[test]
    fn names_round_trip() {
        for v in VariantName::ALL {
            assert_eq!(v.as_str().parse::<VariantName>().unwrap(), v);
        }
        assert!("mppi".parse::<VariantName>().is_err());
    }
}
