//! Per-iteration traces and multi-run summaries.

use alloc::vec::Vec;

use crate::benchmarks::Objective;
use crate::error::{config_err, Result};
use crate::geometry::angle_between;
use crate::linalg::quantile_sorted;
use crate::optimizer::{RasConfig, RunState, StepOutcome, StepReport};

/// Snapshot taken after one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub evaluations_used: usize,
    pub best_f: f64,
    pub f_first_shot: f64,
    /// Some shot of this iteration evaluated to NaN or an infinity.
    pub non_finite: bool,
    pub outcome: StepOutcome,
    pub box_min_len: f64,
    pub box_max_len: f64,
    pub box_ratio: f64,
    /// Angle between the dominant basis vector and the direction to the known
    /// optimum, radians in `[0, π/2]`.
    pub angle_to_optimum: Option<f64>,
}

/// The full record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub config: RasConfig,
    pub seed: u64,
    /// Objective value at the start point.
    pub initial_f: f64,
    /// Evaluations spent before the first iteration.
    pub initial_evaluations: usize,
}

impl Trace {
    pub fn new(config: RasConfig, initial_f: f64, initial_evaluations: usize) -> Self {
        Self {
            records: Vec::new(),
            seed: config.seed,
            config,
            initial_f,
            initial_evaluations,
        }
    }

    pub fn push(&mut self, record: TraceRecord) {
        debug_assert!(self.records.last().is_none_or(
            |r| r.iteration < record.iteration && r.evaluations_used < record.evaluations_used
        ));
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Best value after the last iteration (the start value for an empty trace).
    pub fn final_best(&self) -> f64 {
        self.records.last().map_or(self.initial_f, |r| r.best_f)
    }

    /// Best value known after `evaluations` objective calls: the record with
    /// the largest `evaluations_used <= evaluations`, or the start value when
    /// no record qualifies.
    pub fn best_at(&self, evaluations: usize) -> f64 {
        let idx = self
            .records
            .partition_point(|r| r.evaluations_used <= evaluations);
        if idx == 0 {
            self.initial_f
        } else {
            self.records[idx - 1].best_f
        }
    }

    /// Number of adjacent records where `best_f` increases.
    pub fn monotonicity_violations(&self) -> usize {
        let mut prev = self.initial_f;
        let mut violations = 0;
        for r in &self.records {
            if r.best_f > prev {
                violations += 1;
            }
            prev = r.best_f;
        }
        violations
    }
}

/// Builds the trace record for the state reached after a step.
pub fn record_iteration<O: Objective + ?Sized>(
    state: &RunState,
    report: &StepReport,
    objective: &O,
) -> TraceRecord {
    let metrics = state.sbox.metrics();
    let angle_to_optimum = objective.optimum().and_then(|opt| {
        if opt.point.len() != state.x.len() || opt.point == state.x {
            return None;
        }
        let to_opt: Vec<f64> = opt.point.iter().zip(&state.x).map(|(o, x)| o - x).collect();
        angle_between(state.sbox.basis(metrics.dominant), &to_opt).ok()
    });
    TraceRecord {
        iteration: state.iterations,
        evaluations_used: state.evaluations_used,
        best_f: state.best_f(),
        f_first_shot: report.f_first_shot,
        non_finite: report.non_finite,
        outcome: report.outcome,
        box_min_len: metrics.min_len,
        box_max_len: metrics.max_len,
        box_ratio: metrics.ratio,
        angle_to_optimum,
    }
}

/// Order statistics of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl Quartiles {
    /// Quartiles with linear interpolation between order statistics. An empty
    /// sample gives all-NaN.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                min: f64::NAN,
                q1: f64::NAN,
                median: f64::NAN,
                q3: f64::NAN,
                max: f64::NAN,
                mean: f64::NAN,
            };
        }
        let mut sorted = Vec::from(values);
        sorted.sort_by(f64::total_cmp);
        Self {
            min: sorted[0],
            q1: quantile_sorted(&sorted, 0.25),
            median: quantile_sorted(&sorted, 0.5),
            q3: quantile_sorted(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        }
    }
}

/// Cross-run statistics at one evaluation budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryPoint {
    pub evaluations: usize,
    pub stats: Quartiles,
    /// Mean over the runs kept by the filter, if one was given.
    pub filtered_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiRunSummary {
    pub points: Vec<SummaryPoint>,
    pub runs: usize,
    /// Runs kept by the filter, if one was given.
    pub filtered_runs: Option<usize>,
}

/// Step-function summary of `traces` on `grid`.
pub fn summarize_runs(traces: &[Trace], grid: &[usize]) -> Result<MultiRunSummary> {
    summarize(traces, grid, None)
}

/// Like [`summarize_runs`], also averaging the runs for which `keep` holds.
pub fn summarize_runs_filtered(
    traces: &[Trace],
    grid: &[usize],
    keep: &dyn Fn(&Trace) -> bool,
) -> Result<MultiRunSummary> {
    summarize(traces, grid, Some(keep))
}

/// Keeps runs whose final best value is at most `threshold`.
pub fn final_value_at_most(threshold: f64) -> impl Fn(&Trace) -> bool {
    move |t| t.final_best() <= threshold
}

fn summarize(
    traces: &[Trace],
    grid: &[usize],
    keep: Option<&dyn Fn(&Trace) -> bool>,
) -> Result<MultiRunSummary> {
    if traces.is_empty() {
        return Err(config_err("cannot summarize zero runs"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(config_err("evaluation grid must be strictly increasing"));
    }
    let kept: Option<Vec<&Trace>> = keep.map(|k| traces.iter().filter(|t| k(t)).collect());
    let mut values = Vec::with_capacity(traces.len());
    let points = grid
        .iter()
        .map(|&e| {
            values.clear();
            values.extend(traces.iter().map(|t| t.best_at(e)));
            let filtered_mean = kept.as_ref().map(|k| {
                if k.is_empty() {
                    f64::NAN
                } else {
                    k.iter().map(|t| t.best_at(e)).sum::<f64>() / k.len() as f64
                }
            });
            SummaryPoint {
                evaluations: e,
                stats: Quartiles::of(&values),
                filtered_mean,
            }
        })
        .collect();
    Ok(MultiRunSummary {
        points,
        runs: traces.len(),
        filtered_runs: kept.map(|k| k.len()),
    })
}

/// Up to 100 evenly spaced budgets ending at `budget`.
pub fn default_grid(budget: usize) -> Vec<usize> {
    let n = budget.min(100);
    let mut grid: Vec<usize> = (1..=n).map(|i| i * budget / n).collect();
    grid.dedup();
    grid
}
