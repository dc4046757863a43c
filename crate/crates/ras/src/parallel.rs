//! Multi-threaded drivers over the sequential core.
//!
//! Every run or Monte-Carlo unit draws from its own stream, and results are
//! collected in index order, so output is identical for any worker count.

use rayon::prelude::*;
use rayon::ThreadPool;

use ras_core::diagnostics::default_grid;
use ras_core::experiments::{
    ablation_cells, avg_random_angle, campaign_config, campaign_seed, double_shot_rows,
    AblationCell, AngleTableRow, Campaign, SuccessProbRow,
};
use ras_core::optimizer::run;
use ras_core::{Objective, RasConfig, Variant};

use crate::error::{Error, Result};

pub fn pool(workers: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {workers} workers: {e}")))
}

/// Parallel counterpart of [`ras_core::experiments::run_campaign`].
pub fn run_campaign<O: Objective + ?Sized>(
    objective: &O,
    config: &RasConfig,
    n_runs: usize,
    budget: usize,
    base_seed: u64,
    workers: usize,
) -> Result<Campaign> {
    if n_runs == 0 {
        return Err(Error::Usage("a campaign needs at least one run".into()));
    }
    let results = pool(workers)?.install(|| {
        (0..n_runs)
            .into_par_iter()
            .map(|i| {
                log::debug!("campaign run {i} (seed {})", campaign_seed(base_seed, i));
                run(
                    objective,
                    &campaign_config(config, budget, base_seed, i),
                    None,
                )
                .map_err(|e| ras_core::Error::Run {
                    index: i,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(Campaign::from_results(results, default_grid(budget))?)
}

/// Parallel counterpart of [`ras_core::experiments::run_ablation_grid`];
/// every `(cell, seed)` pair is an independent job.
pub fn run_ablation_grid<O: Objective + ?Sized>(
    objective: &O,
    etas: &[f64],
    rho_cons: &[f64],
    variants: &[Variant],
    seeds: &[u64],
    budget: usize,
    workers: usize,
) -> Result<Vec<AblationCell>> {
    if seeds.is_empty() {
        return Err(Error::Usage("ablation needs at least one seed".into()));
    }
    let cells = ablation_cells(etas, rho_cons, variants)?;
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| seeds.iter().map(move |&s| (c, s)))
        .collect();
    let outcomes: Vec<ras_core::Result<f64>> = pool(workers)?.install(|| {
        jobs.par_iter()
            .map(|&(c, seed)| {
                run(objective, &cells[c].config(seed, budget), None).map(|r| r.best_f)
            })
            .collect()
    });
    let mut outcomes = outcomes.into_iter();
    Ok(cells
        .iter()
        .map(|cell| {
            let per_seed = seeds
                .iter()
                .map(|&s| (s, outcomes.next().expect("one outcome per job")))
                .collect();
            AblationCell::from_outcomes(cell, per_seed)
        })
        .collect())
}

pub fn angle_table(
    dims: &[usize],
    n_samples: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<AngleTableRow>> {
    let rows = pool(workers)?.install(|| {
        dims.par_iter()
            .map(|&d| avg_random_angle(d, n_samples, seed))
            .collect::<ras_core::Result<Vec<_>>>()
    })?;
    Ok(rows)
}

/// Success probabilities in row-major table order (ratio outer, dimension
/// inner).
pub fn success_table(
    dims: &[usize],
    ratios: &[f64],
    n_samples: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<SuccessProbRow>> {
    let per_dim = pool(workers)?.install(|| {
        dims.par_iter()
            .map(|&d| double_shot_rows(d, ratios, n_samples, seed))
            .collect::<ras_core::Result<Vec<_>>>()
    })?;
    let mut rows = Vec::with_capacity(dims.len() * ratios.len());
    for r in 0..ratios.len() {
        for col in &per_dim {
            rows.push(col[r]);
        }
    }
    Ok(rows)
}
