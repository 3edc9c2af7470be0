//! Rayon drivers. Every task owns its RNG stream and results are collected in
//! index order, so output does not depend on the thread count.

use rayon::prelude::*;

use selbound_core::oracle::{
    check_min_entropy_point, min_entropy_grid, oracle_transform_check, scenario_rng,
    MinEntropyPoint, ShapeEvaluator, SweepConfig, SweepRecord, TransformCheck,
};
use selbound_core::scenarios::{prepare, ScenarioConfig, ScenarioReport};
use selbound_core::{BoundOptions, Result, TransformLimits};

/// Parallel counterpart of `oracle::run_sweep`, identical output.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let evaluators = (0..cfg.shapes.len())
        .into_par_iter()
        .map(|i| ShapeEvaluator::new(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    let per = cfg.scenarios_per_shape;
    Ok((0..cfg.total())
        .into_par_iter()
        .map(|idx| evaluators[idx / per].evaluate(cfg, idx % per))
        .collect())
}

/// Parallel counterpart of `scenarios::run_scenario`, identical output.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    opts: &BoundOptions,
    limits: &TransformLimits,
) -> Result<ScenarioReport> {
    let prepared = prepare(cfg, opts, limits)?;
    let failures: u64 = (0..prepared.block_count())
        .into_par_iter()
        .map(|b| prepared.run_block(b))
        .sum();
    Ok(prepared.finish(failures))
}

/// Summary of the minimum-entropy oracle comparison.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MinEntropyCheck {
    pub n_max: usize,
    pub points: usize,
    pub restarts: usize,
    pub iters: usize,
    /// Points where the exact minimum exceeded the oracle by more than `tol`.
    pub oracle_below_exact: usize,
    /// Points where `Ω` exceeded the exact minimum by more than `tol`.
    pub omega_above_exact: usize,
    pub staircase_mismatches: usize,
    /// Fraction of points where the oracle came within `1e-6` of the exact
    /// minimum.
    pub oracle_converged_fraction: f64,
    pub max_oracle_gap: f64,
    pub failures: usize,
    pub pass: bool,
}

pub fn min_entropy_check(
    n_max: usize,
    grid: usize,
    restarts: usize,
    iters: usize,
    seed: u64,
    tol: f64,
) -> MinEntropyCheck {
    let shapes = min_entropy_grid(n_max, grid);
    let results: Vec<Result<MinEntropyPoint>> = shapes
        .par_iter()
        .enumerate()
        .map(|(i, s)| check_min_entropy_point(s, restarts, iters, seed, i))
        .collect();
    let ok: Vec<&MinEntropyPoint> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
    let failures = results.len() - ok.len();
    let oracle_below_exact = ok.iter().filter(|p| p.exact > p.oracle + tol).count();
    let omega_above_exact = ok.iter().filter(|p| p.omega > p.exact + tol).count();
    let staircase_mismatches = ok.iter().filter(|p| p.staircase_ok == Some(false)).count();
    let converged = ok.iter().filter(|p| p.oracle - p.exact <= 1e-6).count();
    MinEntropyCheck {
        n_max,
        points: results.len(),
        restarts,
        iters,
        oracle_below_exact,
        omega_above_exact,
        staircase_mismatches,
        oracle_converged_fraction: converged as f64 / ok.len().max(1) as f64,
        max_oracle_gap: ok.iter().map(|p| p.oracle - p.exact).fold(0.0, f64::max),
        failures,
        pass: failures == 0
            && oracle_below_exact == 0
            && omega_above_exact == 0
            && staircase_mismatches == 0,
    }
}

/// Transform oracle over every `N ≤ n_max`, `k ≤ min(k_max, N)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TransformOracleCheck {
    pub n_max: usize,
    pub k_max: usize,
    pub trials: usize,
    pub cases: usize,
    pub max_dev_unique: f64,
    pub max_dev_repeated: f64,
    pub counts_ok: bool,
    pub pass: bool,
}

pub fn transform_check(
    n_max: usize,
    k_max: usize,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<TransformOracleCheck> {
    let pairs: Vec<(usize, usize)> = (1..=n_max)
        .flat_map(|n| (1..=k_max.min(n)).map(move |k| (n, k)))
        .collect();
    let checks = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(n, k))| {
            let mut rng = scenario_rng(seed, (usize::MAX >> 32) - 1, i);
            oracle_transform_check(n, k, trials, &mut rng)
        })
        .collect::<Result<Vec<TransformCheck>>>()?;
    let cases = checks.iter().map(|c| c.cases).sum();
    let max_dev_unique = checks.iter().map(|c| c.max_dev_unique).fold(0.0, f64::max);
    let max_dev_repeated = checks
        .iter()
        .map(|c| c.max_dev_repeated)
        .fold(0.0, f64::max);
    let counts_ok = checks.iter().all(|c| c.counts_ok);
    Ok(TransformOracleCheck {
        n_max,
        k_max,
        trials,
        cases,
        max_dev_unique,
        max_dev_repeated,
        counts_ok,
        pass: counts_ok && max_dev_unique <= tol && max_dev_repeated <= tol,
    })
}
