use std::path::Path;
use std::time::Instant;

use svmpc::control::VariantName;
use svmpc::harness::{run_batch, run_trial, BatchStats, BatchSummary, TerminalReason, TrialResult};
use svmpc::inference::KernelSpec;

use crate::config::ExperimentFile;
use crate::output::{self, fmt_f64, ResultRecord};
use crate::CliError;

/// Runs one trial and writes `summary.json` and `trajectory.csv` under `out`.
///
/// A solver failure still writes both files; the caller decides the exit code
/// from the returned result.
pub fn run(file: &ExperimentFile, seed: u64, out: &Path) -> Result<TrialResult, CliError> {
    let start = Instant::now();
    let result = run_trial(&file.trial(seed))?;
    let record = ResultRecord::new(&result, file.env.name.name(), &file.hash(), start.elapsed().as_secs_f64());
    output::write(&out.join("summary.json"), &record.to_json())?;
    output::write(&out.join("trajectory.csv"), &output::trajectory_csv(&result))?;
    Ok(result)
}

/// Exit status for a finished single run: 3 on solver failure, else 0.
pub fn run_exit_code(result: &TrialResult) -> i32 {
    if result.terminal_reason == TerminalReason::SolverFailure {
        3
    } else {
        0
    }
}

pub struct MethodBatch {
    pub method: VariantName,
    pub summary: BatchSummary,
}

fn batch_for(file: &ExperimentFile, seeds: &[u64], jobs: usize) -> Result<BatchSummary, CliError> {
    Ok(run_batch(&file.trial(0), seeds, jobs)?)
}

fn write_records(file: &ExperimentFile, summary: &BatchSummary, dir: &Path, trajectories: bool) -> Result<(), CliError> {
    let hash = file.hash();
    for (r, wall) in summary.results.iter().zip(&summary.wall_clock) {
        let record = ResultRecord::new(r, file.env.name.name(), &hash, *wall);
        output::write(&dir.join(format!("seed_{}.json", r.seed)), &record.to_json())?;
        if trajectories {
            output::write(&dir.join(format!("seed_{}.csv", r.seed)), &output::trajectory_csv(r))?;
        }
    }
    Ok(())
}

/// Runs the seed batch once per method. Writes `aggregate.csv`, `trials.csv`
/// and per-trial records under `out/records/<method>/`.
pub fn batch(
    file: &ExperimentFile,
    methods: &[VariantName],
    seeds: &[u64],
    jobs: usize,
    out: &Path,
    trajectories: bool,
) -> Result<Vec<MethodBatch>, CliError> {
    check_seeds(seeds)?;
    let env = file.env.name.name();
    let mut aggregate = format!("{}\n", output::AGGREGATE_HEADER);
    let mut trials = format!("{}\n", output::TRIALS_HEADER);
    let mut batches = Vec::new();
    for &method in methods {
        let f = file.with_method(method);
        let summary = batch_for(&f, seeds, jobs)?;
        write_records(&f, &summary, &out.join("records").join(method.as_str()), trajectories)?;
        output::aggregate_row(&mut aggregate, method.as_str(), env, &summary.stats);
        output::trials_csv_rows(&mut trials, &summary.results);
        batches.push(MethodBatch { method, summary });
    }
    output::write(&out.join("aggregate.csv"), &aggregate)?;
    output::write(&out.join("trials.csv"), &trials)?;
    Ok(batches)
}

fn check_seeds(seeds: &[u64]) -> Result<(), CliError> {
    if seeds.is_empty() {
        Err(CliError::Config("--seeds: need at least one seed".into()))
    } else {
        Ok(())
    }
}

/// Table-style rendering of method/label statistics for the terminal.
pub fn stats_table(label: &str, rows: &[(String, BatchStats)]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, s)| {
            let time = if s.successes == 0 {
                "-".to_string()
            } else {
                format!("{:.2} ± {:.2}", s.mean_time, s.std_time)
            };
            vec![name.clone(), format!("{:.1}", s.success_pct), time, s.trials.to_string()]
        })
        .collect();
    output::text_table(&[label, "Success (%)", "Time (s)", "Trials"], &body)
}

/// The three kernels compared in the ablation. Bandwidths come from the
/// configured kernel when it has one of the same family.
pub fn ablation_kernels(configured: &KernelSpec) -> [(&'static str, KernelSpec); 3] {
    let rbf = match configured {
        KernelSpec::Rbf { .. } => *configured,
        _ => KernelSpec::default(),
    };
    let imq = match configured {
        KernelSpec::Imq { .. } => *configured,
        _ => KernelSpec::imq_default(),
    };
    [("imq", imq), ("rbf", rbf), ("constant", KernelSpec::Constant)]
}

pub struct KernelRow {
    pub kernel: &'static str,
    pub summary: BatchSummary,
}

/// Runs the Stein-adaptive planner once per kernel on identical seeds.
/// Writes `ablation.csv`, `trials.csv` and records under `out/records/<kernel>/`.
pub fn ablate_kernels(file: &ExperimentFile, seeds: &[u64], jobs: usize, out: &Path) -> Result<Vec<KernelRow>, CliError> {
    check_seeds(seeds)?;
    let mut table = String::from("kernel,success_pct,mean_time,std_time,trials,mean_time_all,std_time_all\n");
    let mut trials = format!("kernel,{}\n", output::TRIALS_HEADER);
    let mut rows = Vec::new();
    for (name, kernel) in ablation_kernels(&file.svgd.kernel) {
        let mut f = file.with_method(VariantName::SteinAdaptive);
        f.svgd.kernel = kernel;
        let summary = batch_for(&f, seeds, jobs)?;
        write_records(&f, &summary, &out.join("records").join(name), false)?;
        let s = &summary.stats;
        table.push_str(&format!(
            "{name},{},{},{},{},{},{}\n",
            fmt_f64(s.success_pct),
            fmt_f64(s.mean_time),
            fmt_f64(s.std_time),
            s.trials,
            fmt_f64(s.mean_time_all),
            fmt_f64(s.std_time_all)
        ));
        let mut block = String::new();
        output::trials_csv_rows(&mut block, &summary.results);
        for line in block.lines() {
            trials.push_str(&format!("{name},{line}\n"));
        }
        rows.push(KernelRow { kernel: name, summary });
    }
    output::write(&out.join("ablation.csv"), &table)?;
    output::write(&out.join("trials.csv"), &trials)?;
    Ok(rows)
}

/// Lap progress of one trial on the grid `t_k = k * dt`, `k = 0..=steps`,
/// as the furthest progress reached so far. After the trial ends the last
/// value is held.
pub fn progress_series(result: &TrialResult, steps: usize) -> Vec<f64> {
    let mut raw: Vec<f64> = result.steps.iter().map(|s| s.progress.unwrap_or(0.0)).collect();
    raw.push(result.final_progress.unwrap_or(0.0));
    let mut best = f64::NEG_INFINITY;
    (0..=steps)
        .map(|k| {
            best = best.max(raw[k.min(raw.len() - 1)]);
            best
        })
        .collect()
}

pub struct RaceSummary {
    pub method: VariantName,
    /// `(t, mean, std)` over seeds.
    pub series: Vec<(f64, f64, f64)>,
    pub laps_completed: usize,
    pub trials: usize,
    pub best_lap_time: Option<f64>,
    pub summary: BatchSummary,
}

/// Per-method progress-over-time series and lap times for a track task.
/// Writes `progress_<method>.csv`, `lap_times.csv` and `trials.csv`.
pub fn race_progress(
    file: &ExperimentFile,
    methods: &[VariantName],
    seeds: &[u64],
    jobs: usize,
    out: &Path,
) -> Result<Vec<RaceSummary>, CliError> {
    check_seeds(seeds)?;
    if !matches!(file.cost.goal, svmpc::cost::Goal::Track { .. }) {
        return Err(CliError::Config("cost.goal: race-progress needs a track goal".into()));
    }
    let dt = file.env.dt;
    let n_steps = (file.harness.duration / dt + 1e-9).floor() as usize;
    let mut laps = String::from("method,laps_completed,trials,completion_pct,best_lap_time,mean_lap_time\n");
    let mut trials = format!("{}\n", output::TRIALS_HEADER);
    let mut summaries = Vec::new();
    for &method in methods {
        let f = file.with_method(method);
        let summary = batch_for(&f, seeds, jobs)?;
        let per_trial: Vec<Vec<f64>> = summary.results.iter().map(|r| progress_series(r, n_steps)).collect();
        let mut csv = String::from("t,mean_progress,std_progress,trials\n");
        let mut series = Vec::with_capacity(n_steps + 1);
        for k in 0..=n_steps {
            let vals: Vec<f64> = per_trial.iter().map(|s| s[k]).collect();
            let (mean, std) = mean_std(&vals);
            let t = k as f64 * dt;
            csv.push_str(&format!("{},{},{},{}\n", fmt_f64(t), fmt_f64(mean), fmt_f64(std), vals.len()));
            series.push((t, mean, std));
        }
        output::write(&out.join(format!("progress_{method}.csv")), &csv)?;

        let lap_times: Vec<f64> = summary.results.iter().filter(|r| r.success).map(|r| r.completion_time).collect();
        let best = lap_times.iter().copied().reduce(f64::min);
        let mean_lap = if lap_times.is_empty() {
            f64::NAN
        } else {
            lap_times.iter().sum::<f64>() / lap_times.len() as f64
        };
        laps.push_str(&format!(
            "{method},{},{},{},{},{}\n",
            lap_times.len(),
            seeds.len(),
            fmt_f64(100.0 * lap_times.len() as f64 / seeds.len() as f64),
            fmt_f64(best.unwrap_or(f64::NAN)),
            fmt_f64(mean_lap)
        ));
        output::trials_csv_rows(&mut trials, &summary.results);
        summaries.push(RaceSummary {
            method,
            series,
            laps_completed: lap_times.len(),
            trials: seeds.len(),
            best_lap_time: best,
            summary,
        });
    }
    output::write(&out.join("lap_times.csv"), &laps)?;
    output::write(&out.join("trials.csv"), &trials)?;
    Ok(summaries)
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
