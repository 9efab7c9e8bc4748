use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{run_trial_with, TerminalReason, TrialConfig, TrialResult};
use crate::error::Result;
use crate::exec::{with_jobs, Exec};

/// Success rate and completion-time statistics over a seed batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub trials: usize,
    pub successes: usize,
    pub success_pct: f64,
    /// Mean completion time over successful trials (NaN when none succeeded).
    pub mean_time: f64,
    /// Sample standard deviation over successful trials; 0 for a single one.
    pub std_time: f64,
    /// Same statistics with failed trials counted at the full duration.
    pub mean_time_all: f64,
    pub std_time_all: f64,
    pub solver_failures: usize,
}

impl BatchStats {
    /// Aggregates in a fixed (sorted) order so the result does not depend on
    /// the order of `results`.
    pub fn from_results(results: &[TrialResult]) -> Self {
        let mut ok: Vec<f64> = results.iter().filter(|r| r.success).map(|r| r.completion_time).collect();
        let mut all: Vec<f64> = results.iter().map(|r| r.completion_time).collect();
        ok.sort_by(f64::total_cmp);
        all.sort_by(f64::total_cmp);
        let (mean_time, std_time) = mean_std(&ok);
        let (mean_time_all, std_time_all) = mean_std(&all);
        let successes = ok.len();
        BatchStats {
            trials: results.len(),
            successes,
            success_pct: if results.is_empty() {
                0.0
            } else {
                100.0 * successes as f64 / results.len() as f64
            },
            mean_time,
            std_time,
            mean_time_all,
            std_time_all,
            solver_failures: results
                .iter()
                .filter(|r| r.terminal_reason == TerminalReason::SolverFailure)
                .count(),
        }
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    match v.len() {
        0 => (f64::NAN, f64::NAN),
        1 => (v[0], 0.0),
        n => {
            let mean = v.iter().sum::<f64>() / n as f64;
            let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            (mean, var.sqrt())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub stats: BatchStats,
    /// Per-trial results in the order of the requested seeds.
    pub results: Vec<TrialResult>,
    /// Wall-clock seconds per trial, same order. Not reproducible.
    pub wall_clock: Vec<f64>,
}

/// Runs `base` once per seed on up to `jobs` threads.
///
/// The configuration is validated once up front; after that every trial
/// produces a result, failed or not.
pub fn run_batch(base: &TrialConfig, seeds: &[u64], jobs: usize) -> Result<BatchSummary> {
    if seeds.is_empty() {
        return Err(crate::error::Error::config("batch.seeds", "need at least one seed"));
    }
    base.validate()?;
    let timed = with_jobs(jobs, || {
        Exec::Parallel.map_slice(seeds, |&seed| {
            let cfg = TrialConfig { seed, ..base.clone() };
            let start = Instant::now();
            run_trial_with(Exec::Parallel, &cfg).map(|r| (r, start.elapsed().as_secs_f64()))
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (results, wall_clock): (Vec<_>, Vec<_>) = timed.into_iter().unzip();
    Ok(BatchSummary {
        stats: BatchStats::from_results(&results),
        results,
        wall_clock,
    })
}
