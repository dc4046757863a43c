//! Monte-Carlo geometry experiments, ablation grids and multi-seed campaigns.
//!
//! Every unit of work owns a stream derived only from its seed and its
//! coordinates (dimension, run index), so results do not depend on the order
//! or the thread in which units execute.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use crate::benchmarks::{Objective, HARTMANN6_LOCAL_MIN, HARTMANN6_MIN_VALUE};
use crate::diagnostics::{default_grid, summarize_runs, MultiRunSummary, Quartiles, Trace};
use crate::error::{config_err, Error, Result};
use crate::optimizer::{run, RasConfig, RunResult, Stream, Variant};

/// Dimensions of the appendix tables.
pub const TABLE_DIMS: [usize; 9] = [1, 2, 3, 5, 10, 50, 100, 500, 1000];

/// Radius ratios `r_B' / r_B` of the double-shot table, in row order.
pub const TABLE_RATIOS: [f64; 7] = [1.0, 0.5, 0.1, 0.05, 0.01, 0.005, 0.001];

/// Samples per dimension for the angle table.
pub const ANGLE_SAMPLES: usize = 10_000;

/// Samples per cell for the success-probability table.
pub const SUCCESS_SAMPLES: usize = 100_000;

/// Ablation grid defaults.
pub const DEFAULT_ETAS: [f64; 4] = [0.05, 0.1, 0.2, 0.4];
pub const DEFAULT_RHO_CONS: [f64; 3] = [0.1, 0.2, 0.5];

/// Separates Hartmann6 runs that reached the global basin from those stuck in
/// the next-best local minimum.
pub const HARTMANN6_BASIN_THRESHOLD: f64 = 0.5 * (HARTMANN6_MIN_VALUE + HARTMANN6_LOCAL_MIN);

fn unit_stream(seed: u64, unit: u64) -> Stream {
    let mut rng = Stream::seed_from_u64(seed);
    rng.set_stream(unit);
    rng
}

fn normal_vector<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AngleTableRow {
    pub dim: usize,
    pub avg_angle_deg: f64,
    pub n_samples: usize,
    pub std_error_deg: f64,
}

/// Mean angle between the lines spanned by two random directions in `d`
/// dimensions, folded into `[0°, 90°]`.
pub fn avg_random_angle(d: usize, n_samples: usize, seed: u64) -> Result<AngleTableRow> {
    if d == 0 || n_samples == 0 {
        return Err(config_err(
            "avg_random_angle needs d >= 1 and n_samples >= 1",
        ));
    }
    let mut rng = unit_stream(seed, d as u64);
    let mut u = vec![0.0; d];
    let mut v = vec![0.0; d];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_samples {
        normal_vector(&mut rng, &mut u);
        normal_vector(&mut rng, &mut v);
        // A zero draw has probability zero; skip it rather than divide by it.
        let angle = match crate::geometry::angle_between(&u, &v) {
            Ok(a) => a.to_degrees(),
            Err(_) => continue,
        };
        sum += angle;
        sum_sq += angle * angle;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = if n_samples > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(AngleTableRow {
        dim: d,
        avg_angle_deg: mean,
        n_samples,
        std_error_deg: libm::sqrt(var / n),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SuccessProbRow {
    pub dim: usize,
    pub radius_ratio: f64,
    pub probability: f64,
    pub n_samples: usize,
}

/// Draws `Δ` uniformly in the ball of radius `radius` around the origin
/// (Gaussian direction, radius `radius · U^(1/d)`).
fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, radius: f64, out: &mut [f64]) {
    let d = out.len();
    loop {
        normal_vector(rng, out);
        let n = crate::linalg::norm(out);
        if n > 0.0 {
            let r = radius * libm::pow(rng.random::<f64>(), 1.0 / d as f64);
            out.iter_mut().for_each(|v| *v *= r / n);
            return;
        }
    }
}

/// `‖±Δ - c‖ < 1` for `c = e_1`, i.e. one of the two shots lands in the unit
/// ball tangent to the origin.
fn double_shot_hits(delta: &[f64]) -> bool {
    let rest: f64 = delta[1..].iter().map(|v| v * v).sum();
    let plus = (delta[0] - 1.0) * (delta[0] - 1.0) + rest;
    let minus = (-delta[0] - 1.0) * (-delta[0] - 1.0) + rest;
    plus < 1.0 || minus < 1.0
}

/// Fraction of displacements, uniform in a ball of radius `radius_ratio`
/// around the current point, for which `x + Δ` or `x - Δ` falls inside the
/// tangent unit ball centred at `e_1`.
///
/// Draws depend on `(seed, d)` only, so calls with different ratios reuse
/// the same directions and radii.
pub fn double_shot_success(
    d: usize,
    radius_ratio: f64,
    n_samples: usize,
    seed: u64,
) -> Result<SuccessProbRow> {
    let mut rows = double_shot_rows(d, &[radius_ratio], n_samples, seed)?;
    Ok(rows.remove(0))
}

/// [`double_shot_success`] for several ratios at once, sharing one set of
/// draws. Identical to calling it once per ratio.
pub fn double_shot_rows(
    d: usize,
    ratios: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<SuccessProbRow>> {
    if d == 0 || n_samples == 0 {
        return Err(config_err(
            "double_shot_success needs d >= 1 and n_samples >= 1",
        ));
    }
    if ratios.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(config_err("radius ratios must be positive"));
    }
    let mut rng = unit_stream(seed, d as u64);
    let mut unit = vec![0.0; d];
    let mut delta = vec![0.0; d];
    let mut hits = vec![0usize; ratios.len()];
    for _ in 0..n_samples {
        uniform_in_ball(&mut rng, 1.0, &mut unit);
        for (hit, &ratio) in hits.iter_mut().zip(ratios) {
            delta
                .iter_mut()
                .zip(&unit)
                .for_each(|(d, u)| *d = ratio * u);
            if double_shot_hits(&delta) {
                *hit += 1;
            }
        }
    }
    Ok(ratios
        .iter()
        .zip(hits)
        .map(|(&radius_ratio, h)| SuccessProbRow {
            dim: d,
            radius_ratio,
            probability: h as f64 / n_samples as f64,
            n_samples,
        })
        .collect())
}

/// Result of one failed run inside a grid or campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub seed: u64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationCell {
    pub eta: f64,
    pub rho_con: f64,
    pub rho_dil: f64,
    pub variant: Variant,
    /// Final best value of every successful run, in seed order.
    pub values: Vec<f64>,
    pub failures: Vec<RunFailure>,
    pub summary: Quartiles,
}

impl AblationCell {
    /// Assembles a cell from per-seed outcomes given in seed order.
    pub fn from_outcomes(cell: &CellSpec, outcomes: Vec<(u64, Result<f64>)>) -> Self {
        let mut values = Vec::with_capacity(outcomes.len());
        let mut failures = Vec::new();
        for (seed, outcome) in outcomes {
            match outcome {
                Ok(v) => values.push(v),
                Err(error) => failures.push(RunFailure { seed, error }),
            }
        }
        Self {
            eta: cell.eta,
            rho_con: cell.rho_con,
            rho_dil: cell.rho_dil(),
            variant: cell.variant,
            summary: Quartiles::of(&values),
            values,
            failures,
        }
    }
}

/// One `(eta, rho_con, variant)` combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    pub eta: f64,
    pub rho_con: f64,
    pub variant: Variant,
}

impl CellSpec {
    /// Dilation is the reciprocal of contraction.
    pub fn rho_dil(&self) -> f64 {
        1.0 / self.rho_con
    }

    pub fn config(&self, seed: u64, budget: usize) -> RasConfig {
        RasConfig {
            eta: self.eta,
            rho_dil: self.rho_dil(),
            rho_con: self.rho_con,
            variant: self.variant,
            max_evaluations: budget,
            seed,
            ..RasConfig::default()
        }
    }
}

/// Cells in grid order: `eta` outermost, then `rho_con`, then `variant`.
pub fn ablation_cells(
    etas: &[f64],
    rho_cons: &[f64],
    variants: &[Variant],
) -> Result<Vec<CellSpec>> {
    if etas.is_empty() || rho_cons.is_empty() || variants.is_empty() {
        return Err(config_err("ablation parameter lists must be non-empty"));
    }
    let mut cells = Vec::with_capacity(etas.len() * rho_cons.len() * variants.len());
    for &eta in etas {
        for &rho_con in rho_cons {
            for &variant in variants {
                cells.push(CellSpec {
                    eta,
                    rho_con,
                    variant,
                });
            }
        }
    }
    Ok(cells)
}

/// Runs every cell once per seed. Individual run errors are kept in the cell.
pub fn run_ablation_grid<O: Objective + ?Sized>(
    objective: &O,
    etas: &[f64],
    rho_cons: &[f64],
    variants: &[Variant],
    seeds: &[u64],
    budget: usize,
) -> Result<Vec<AblationCell>> {
    if seeds.is_empty() {
        return Err(config_err("ablation needs at least one seed"));
    }
    let cells = ablation_cells(etas, rho_cons, variants)?;
    Ok(cells
        .iter()
        .map(|cell| {
            let outcomes = seeds
                .iter()
                .map(|&seed| {
                    (
                        seed,
                        run(objective, &cell.config(seed, budget), None).map(|r| r.best_f),
                    )
                })
                .collect();
            AblationCell::from_outcomes(cell, outcomes)
        })
        .collect())
}

/// Independent runs of one configuration with consecutive seeds.
#[derive(Debug, Clone)]
pub struct Campaign {
    pub results: Vec<RunResult>,
    pub grid: Vec<usize>,
    pub summary: MultiRunSummary,
}

impl Campaign {
    /// Assembles a campaign from results ordered by run index.
    pub fn from_results(results: Vec<RunResult>, grid: Vec<usize>) -> Result<Self> {
        let traces: Vec<Trace> = results.iter().map(|r| r.trace.clone()).collect();
        let summary = summarize_runs(&traces, &grid)?;
        Ok(Self {
            results,
            grid,
            summary,
        })
    }

    pub fn traces(&self) -> impl Iterator<Item = &Trace> {
        self.results.iter().map(|r| &r.trace)
    }

    /// Summary with the mean restricted to runs ending at or below `threshold`.
    pub fn filtered_summary(&self, threshold: f64) -> Result<MultiRunSummary> {
        let traces: Vec<Trace> = self.traces().cloned().collect();
        crate::diagnostics::summarize_runs_filtered(
            &traces,
            &self.grid,
            &crate::diagnostics::final_value_at_most(threshold),
        )
    }
}

/// Seed of run `index` in a campaign.
pub fn campaign_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(index as u64)
}

/// Configuration of run `index` in a campaign.
pub fn campaign_config(
    config: &RasConfig,
    budget: usize,
    base_seed: u64,
    index: usize,
) -> RasConfig {
    RasConfig {
        max_evaluations: budget,
        seed: campaign_seed(base_seed, index),
        ..config.clone()
    }
}

/// Runs `n_runs` optimizations with seeds `base_seed + i` and summarizes them
/// on [`default_grid`].
pub fn run_campaign<O: Objective + ?Sized>(
    objective: &O,
    config: &RasConfig,
    n_runs: usize,
    budget: usize,
    base_seed: u64,
) -> Result<Campaign> {
    if n_runs == 0 {
        return Err(config_err("a campaign needs at least one run"));
    }
    let results = (0..n_runs)
        .map(|i| {
            run(
                objective,
                &campaign_config(config, budget, base_seed, i),
                None,
            )
            .map_err(|e| Error::Run {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Campaign::from_results(results, default_grid(budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{paraboloid, FnObjective};
    use crate::geometry::DomainBounds;

    #[test]
    fn one_dimensional_angles_are_zero() {
        let row = avg_random_angle(1, 500, 3).unwrap();
        assert_eq!(row.avg_angle_deg, 0.0);
        assert_eq!(row.std_error_deg, 0.0);
    }

    #[test]
    fn success_in_one_dimension_is_certain() {
        for ratio in [0.001, 0.5, 1.0, 1.999, 2.0] {
            assert_eq!(
                double_shot_success(1, ratio, 2000, 4).unwrap().probability,
                1.0
            );
        }
        assert!(double_shot_success(1, 3.0, 2000, 4).unwrap().probability < 1.0);
    }

    #[test]
    fn batched_rows_match_single_calls() {
        let rows = double_shot_rows(7, &TABLE_RATIOS, 3000, 11).unwrap();
        for row in rows {
            assert_eq!(
                row,
                double_shot_success(7, row.radius_ratio, 3000, 11).unwrap()
            );
        }
    }

    #[test]
    fn monte_carlo_argument_checks() {
        assert!(avg_random_angle(0, 10, 0).is_err());
        assert!(avg_random_angle(3, 0, 0).is_err());
        assert!(double_shot_success(3, 0.0, 10, 0).is_err());
        assert!(double_shot_success(3, 0.5, 0, 0).is_err());
    }

    #[test]
    fn grid_order_and_reciprocal_dilation() {
        let cells =
            ablation_cells(&[0.1, 0.2], &[0.5], &[Variant::Full, Variant::SingleShot]).unwrap();
        assert_eq!(cells.len(), 4);
        assert_eq!((cells[1].eta, cells[1].variant), (0.1, Variant::SingleShot));
        assert_eq!(cells[2].eta, 0.2);
        assert_eq!(cells[0].rho_dil(), 2.0);
        assert!(ablation_cells(&[], &[0.5], &[Variant::Full]).is_err());
    }

    #[test]
    fn single_cell_single_seed() {
        let f = paraboloid(3).unwrap();
        let cells = run_ablation_grid(&f, &[0.2], &[0.2], &[Variant::Full], &[9], 200).unwrap();
        assert_eq!(cells.len(), 1);
        let direct = run(&f, &cells[0].eta_config(9, 200), None).unwrap().best_f;
        assert_eq!(cells[0].values, vec![direct]);
        assert_eq!(cells[0].summary.median, direct);
    }

    impl AblationCell {
        fn eta_config(&self, seed: u64, budget: usize) -> RasConfig {
            CellSpec {
                eta: self.eta,
                rho_con: self.rho_con,
                variant: self.variant,
            }
            .config(seed, budget)
        }
    }

    #[test]
    fn grid_records_failures_per_run() {
        let f = paraboloid(2).unwrap();
        // budget 1 is invalid for every run; the grid itself still completes.
        let cells = run_ablation_grid(&f, &[0.2], &[0.2], &[Variant::Full], &[1, 2], 1).unwrap();
        assert_eq!(cells[0].failures.len(), 2);
        assert!(cells[0].values.is_empty());
    }

    #[test]
    fn campaign_is_reproducible() {
        let f = paraboloid(5).unwrap();
        let config = RasConfig::default();
        let a = run_campaign(&f, &config, 3, 300, 40).unwrap();
        let b = run_campaign(&f, &config, 3, 300, 40).unwrap();
        for (x, y) in a.results.iter().zip(&b.results) {
            assert_eq!(x.trace, y.trace);
        }
        assert_eq!(a.results[2].seed, 42);
        assert_eq!(a.summary, b.summary);
    }

    #[test]
    fn single_run_campaign_summary_is_its_step_function() {
        let f = paraboloid(4).unwrap();
        let c = run_campaign(&f, &RasConfig::default(), 1, 150, 0).unwrap();
        for p in &c.summary.points {
            let v = c.results[0].trace.best_at(p.evaluations);
            assert_eq!((p.stats.q1, p.stats.median, p.stats.q3), (v, v, v));
        }
    }

    #[test]
    fn campaign_errors_carry_run_index() {
        let f = FnObjective::new(
            "f",
            DomainBounds::hypercube(2, 0.0, 1.0).unwrap(),
            |x: &[f64]| x[0],
        );
        let bad = RasConfig {
            eta: 2.0,
            ..Default::default()
        };
        match run_campaign(&f, &bad, 2, 10, 0) {
            Err(Error::Run { index: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
