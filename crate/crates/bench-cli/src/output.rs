use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use svmpc::harness::{BatchStats, TerminalReason, TrialResult};

use crate::CliError;

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Summary of one trial as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub version: String,
    pub config_hash: String,
    pub env: String,
    pub method: String,
    pub seed: u64,
    pub success: bool,
    pub completion_time: f64,
    pub terminal_reason: TerminalReason,
    pub steps: usize,
    pub final_state: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_progress: Option<f64>,
    /// Wall-clock seconds spent on the trial. The only field that varies
    /// between identical runs.
    pub wall_clock_s: f64,
}

impl ResultRecord {
    pub fn new(result: &TrialResult, env: &str, config_hash: &str, wall_clock_s: f64) -> Self {
        ResultRecord {
            version: crate::VERSION.to_string(),
            config_hash: config_hash.to_string(),
            env: env.to_string(),
            method: result.method.to_string(),
            seed: result.seed,
            success: result.success,
            completion_time: result.completion_time,
            terminal_reason: result.terminal_reason,
            steps: result.steps.len(),
            final_state: result.final_state.clone(),
            final_progress: result.final_progress,
            wall_clock_s,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }
}

fn csv_line(out: &mut String, fields: impl IntoIterator<Item = String>) {
    let mut first = true;
    for f in fields {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&f);
    }
    out.push('\n');
}

/// Per-step log: `t, state..., control..., cost, particle_i_j...`, plus
/// `progress` for track tasks and `ksd` when recorded.
pub fn trajectory_csv(result: &TrialResult) -> String {
    let mut out = String::new();
    let Some(first) = result.steps.first() else {
        out.push_str("t\n");
        return out;
    };
    let n_state = first.state.len();
    let n_control = first.control.len();
    let n_params = first.particle_mean.len();
    let n_particles = first.particles.len() / n_params.max(1);
    let with_progress = first.progress.is_some();
    let with_ksd = result.steps.iter().any(|s| s.ksd.is_some());

    let mut header = vec!["t".to_string()];
    header.extend((0..n_state).map(|i| format!("x_{i}")));
    header.extend((0..n_control).map(|i| format!("u_{i}")));
    header.push("cost".into());
    for i in 0..n_particles {
        header.extend((0..n_params).map(|j| format!("particle_{i}_{j}")));
    }
    header.extend((0..n_params).map(|j| format!("mean_{j}")));
    if with_progress {
        header.push("progress".into());
    }
    if with_ksd {
        header.push("ksd".into());
    }
    csv_line(&mut out, header);

    for s in &result.steps {
        let mut row = vec![fmt_f64(s.t)];
        row.extend(s.state.iter().map(|v| fmt_f64(*v)));
        row.extend(s.control.iter().map(|v| fmt_f64(*v)));
        row.push(fmt_f64(s.cost));
        row.extend(s.particles.iter().map(|v| fmt_f64(*v)));
        row.extend(s.particle_mean.iter().map(|v| fmt_f64(*v)));
        if with_progress {
            row.push(s.progress.map(fmt_f64).unwrap_or_default());
        }
        if with_ksd {
            row.push(s.ksd.map(fmt_f64).unwrap_or_default());
        }
        csv_line(&mut out, row);
    }
    out
}

pub const TRIALS_HEADER: &str = "method,seed,success,completion_time,terminal_reason,steps,final_progress";

pub fn trials_csv_rows(out: &mut String, results: &[TrialResult]) {
    for r in results {
        let reason = match r.terminal_reason {
            TerminalReason::Success => "success",
            TerminalReason::Timeout => "timeout",
            TerminalReason::SolverFailure => "solver_failure",
        };
        csv_line(
            out,
            [
                r.method.to_string(),
                r.seed.to_string(),
                r.success.to_string(),
                fmt_f64(r.completion_time),
                reason.to_string(),
                r.steps.len().to_string(),
                r.final_progress.map(fmt_f64).unwrap_or_default(),
            ],
        );
    }
}

pub const AGGREGATE_HEADER: &str = "method,env,success_pct,mean_time,std_time,trials,mean_time_all,std_time_all,solver_failures";

pub fn aggregate_row(out: &mut String, method: &str, env: &str, stats: &BatchStats) {
    csv_line(
        out,
        [
            method.to_string(),
            env.to_string(),
            fmt_f64(stats.success_pct),
            fmt_f64(stats.mean_time),
            fmt_f64(stats.std_time),
            stats.trials.to_string(),
            fmt_f64(stats.mean_time_all),
            fmt_f64(stats.std_time_all),
            stats.solver_failures.to_string(),
        ],
    );
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Renders rows as an aligned plain-text table for the terminal.
pub fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: Vec<&str>| {
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            let _ = write!(out, "{c:<w$}");
        }
        out.truncate(out.trim_end().len());
        out.push('\n');
    };
    line(&mut out, header.to_vec());
    for row in rows {
        line(&mut out, row.iter().map(String::as_str).collect());
    }
    out
}
