//! Parallel trial sweeps with worker-count-independent results.

use rayon::prelude::*;

use crate::process::{run_trial, DistributionSpec, ProcessError, StrategyFactory, TrialRecord};
use crate::properties::Property;
use crate::threshold::{self, MeanEstimate, SuccessCurve, ThresholdError, ThresholdEstimate};

/// What to run: one (distribution, strategy, property) cell of a sweep.
pub struct SweepSpec<'a> {
    pub dist: &'a DistributionSpec,
    pub strategy: &'a dyn StrategyFactory,
    pub property: &'a dyn Property,
    pub max_steps: u64,
    pub seed: u64,
    pub trials: u64,
}

/// Runs trials `0..trials` on `workers` threads. Records come back in trial
/// order, and each trial depends only on `(seed, trial)`, so the result is
/// identical for every worker count.
pub fn run_sweep(spec: &SweepSpec<'_>, workers: usize) -> Result<Vec<TrialRecord>, ProcessError> {
    let one = |t: u64| run_trial(spec.dist, spec.strategy, spec.property, spec.max_steps, spec.seed, t);
    if workers <= 1 {
        return (0..spec.trials).map(one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ProcessError::Unsupported(format!("thread pool: {}", e)))?;
    pool.install(|| (0..spec.trials).into_par_iter().map(one).collect())
}

pub fn stopping_times(records: &[TrialRecord]) -> Vec<Option<u64>> {
    records.iter().map(|r| r.stopping_time).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
}

/// Success curve on the semi-random process, run up to `max(t_grid)`.
pub fn success_curve(
    strategy: &dyn StrategyFactory,
    property: &dyn Property,
    n: usize,
    t_grid: &[u64],
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<SuccessCurve, SweepError> {
    let dist = DistributionSpec::semi_random(n)?;
    let max_steps = t_grid.iter().copied().max().unwrap_or(1).max(1);
    let spec = SweepSpec { dist: &dist, strategy, property, max_steps, seed, trials };
    let times = stopping_times(&run_sweep(&spec, workers)?);
    Ok(threshold::success_curve_from_times(&times, t_grid, n, &strategy.id(), &property.id())?)
}

fn semi_random_times(
    strategy: &dyn StrategyFactory,
    property: &dyn Property,
    n: usize,
    trials: u64,
    seed: u64,
    max_steps: u64,
    workers: usize,
) -> Result<Vec<Option<u64>>, SweepError> {
    let dist = DistributionSpec::semi_random(n)?;
    let spec = SweepSpec { dist: &dist, strategy, property, max_steps, seed, trials };
    Ok(stopping_times(&run_sweep(&spec, workers)?))
}

/// `m̂(theta, n)` for the given strategy on the semi-random process.
#[allow(clippy::too_many_arguments)]
pub fn estimate_m_theta(
    strategy: &dyn StrategyFactory,
    property: &dyn Property,
    n: usize,
    theta: f64,
    trials: u64,
    seed: u64,
    max_steps: u64,
    workers: usize,
) -> Result<ThresholdEstimate, SweepError> {
    let times = semi_random_times(strategy, property, n, trials, seed, max_steps, workers)?;
    Ok(threshold::estimate_m_theta_from_times(&times, theta, n)?)
}

/// `Î_n` for the given strategy on the semi-random process.
pub fn estimate_i_n(
    strategy: &dyn StrategyFactory,
    property: &dyn Property,
    n: usize,
    trials: u64,
    seed: u64,
    max_steps: u64,
    workers: usize,
) -> Result<MeanEstimate, SweepError> {
    let times = semi_random_times(strategy, property, n, trials, seed, max_steps, workers)?;
    Ok(threshold::estimate_i_n_from_times(&times, n)?)
}

/// Threshold width `m̂(theta2) - m̂(theta1)` from one shared pool.
#[allow(clippy::too_many_arguments)]
pub fn sharpness_width(
    strategy: &dyn StrategyFactory,
    property: &dyn Property,
    n: usize,
    theta1: f64,
    theta2: f64,
    trials: u64,
    seed: u64,
    max_steps: u64,
    workers: usize,
) -> Result<(u64, f64), SweepError> {
    let times = semi_random_times(strategy, property, n, trials, seed, max_steps, workers)?;
    Ok(threshold::sharpness_width_from_times(&times, theta1, theta2, n)?)
}
