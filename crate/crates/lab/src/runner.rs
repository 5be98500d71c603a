//! Rayon-backed versions of the core experiment drivers.
//!
//! Repeats are addressed by index and collected in order before they are
//! folded, so the reports are bit-identical to the sequential drivers for any
//! thread count.

use kljn_core::experiment::{
    aggregate, run_repeat, sweep_configs, table_configs, ExperimentConfig, ExperimentReport,
    SweepPoint,
};
use kljn_core::CaseLabel;
use rayon::prelude::*;

pub fn run_experiment(config: &ExperimentConfig) -> kljn_core::Result<ExperimentReport> {
    config.validate()?;
    let outcomes = (0..config.repeats as u64)
        .into_par_iter()
        .map(|r| run_repeat(config, r))
        .collect::<kljn_core::Result<Vec<_>>>()?;
    aggregate(config, outcomes)
}

pub fn run_many(configs: &[ExperimentConfig]) -> kljn_core::Result<Vec<ExperimentReport>> {
    configs.par_iter().map(run_experiment).collect()
}

pub fn run_table(
    base: &ExperimentConfig,
    gammas: &[usize],
    cases: &[CaseLabel],
) -> kljn_core::Result<Vec<ExperimentReport>> {
    run_many(&table_configs(base, gammas, cases))
}

/// Sweeps `base` (keeping its coefficients), γ-major over `t_grid`.
pub fn run_sweep(
    base: &ExperimentConfig,
    t_grid: &[f64],
    gammas: &[usize],
) -> kljn_core::Result<Vec<SweepPoint>> {
    Ok(run_many(&sweep_configs(base, t_grid, gammas))?
        .iter()
        .map(SweepPoint::from_report)
        .collect())
}
