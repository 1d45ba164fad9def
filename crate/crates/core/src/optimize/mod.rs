//! Seed initialization and smoothing-parameter search.

mod init;
mod nelder_mead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hw::{smooth_pass, FitResult, ModelSpec, ModelState, SmoothingParams};
use crate::timeseries::metrics;
use crate::timeseries::TimeSeries;

pub use init::init_values;
pub use nelder_mead::{nelder_mead, pattern_search, Minimum, SimplexOptions};

/// Base value added to every out-of-bounds or infeasible point.
pub const PENALTY: f64 = 1e12;

/// Bound on |φ_AR| used by [`default_bounds`].
pub const AR_BOUND: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    NelderMead,
    PatternSearch,
    RandomRestartNelderMead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Rmse,
    Mape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimConfig {
    pub algorithm: Algorithm,
    pub objective: Objective,
    pub max_evals: usize,
    /// Simplex diameter and objective spread at which a run stops; for
    /// pattern search, the smallest poll step.
    pub tolerance: f64,
    /// Per-parameter `[lo, hi]` in the layout of [`SmoothingParams::to_vector`].
    /// `None` means [`default_bounds`].
    pub bounds: Option<Vec<(f64, f64)>>,
    /// Extra random starting points for
    /// [`Algorithm::RandomRestartNelderMead`].
    pub restarts: usize,
    pub rng_seed: u64,
    /// Initial simplex offset / poll step.
    pub initial_step: f64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::NelderMead,
            objective: Objective::Rmse,
            max_evals: 2000,
            tolerance: 1e-7,
            bounds: None,
            restarts: 4,
            rng_seed: 0,
            initial_step: 0.1,
        }
    }
}

/// `[0, 1]` for every smoothing parameter, `[-0.999, 0.999]` for φ_AR.
pub fn default_bounds(spec: &ModelSpec) -> Vec<(f64, f64)> {
    let mut b = vec![(0.0, 1.0); spec.param_count()];
    if spec.ar_adjustment {
        *b.last_mut().expect("ar1 present") = (-AR_BOUND, AR_BOUND);
    }
    b
}

/// Full outcome of a parameter search.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimReport {
    pub params: SmoothingParams,
    pub fit: FitResult,
    /// Best configured objective value (RMSE or MAPE).
    pub f_best: f64,
    pub evals: usize,
    /// Best objective value after each optimizer iteration, across restarts.
    pub trace: Vec<f64>,
    pub converged: bool,
}

fn box_distance(x: &[f64], bounds: &[(f64, f64)]) -> f64 {
    x.iter()
        .zip(bounds)
        .map(|(&v, &(lo, hi))| {
            let d = if v < lo {
                lo - v
            } else if v > hi {
                v - hi
            } else {
                0.0
            };
            d * d
        })
        .sum()
}

struct Problem<'a> {
    ts: &'a TimeSeries,
    spec: &'a ModelSpec,
    seeds: &'a ModelState,
    objective: Objective,
    bounds: Vec<(f64, f64)>,
}

impl Problem<'_> {
    fn score(&self, fit: &FitResult) -> Result<f64> {
        match self.objective {
            Objective::Rmse => Ok(fit.objective),
            Objective::Mape => metrics::mape(fit.scored_actuals(), fit.scored_fitted()),
        }
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        if x.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        let outside = box_distance(x, &self.bounds);
        if outside > 0.0 {
            return PENALTY + outside;
        }
        let n = self.ts.len() as f64;
        let params = match SmoothingParams::from_vector(self.spec, x) {
            Ok(p) => p,
            Err(_) => return PENALTY + 1.0,
        };
        match smooth_pass(self.ts, self.spec, &params, self.seeds) {
            Ok(fit) => match self.score(&fit) {
                Ok(v) if v.is_finite() => v,
                _ => PENALTY + 1.0,
            },
            Err(Error::InfeasibleFit { step, .. }) => PENALTY + (n - step as f64) / n,
            Err(_) => PENALTY + 1.0,
        }
    }
}

fn simplex_steps(x0: &[f64], bounds: &[(f64, f64)], step: f64) -> Vec<f64> {
    x0.iter()
        .zip(bounds)
        .map(|(&v, &(lo, hi))| {
            let s = step.min(hi - lo);
            if v + s <= hi {
                s
            } else {
                -s
            }
        })
        .collect()
}

fn run_simplex(
    f: &mut impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    bounds: &[(f64, f64)],
    config: &OptimConfig,
    budget: usize,
) -> Minimum {
    let opts = SimplexOptions {
        max_evals: budget,
        tolerance: config.tolerance,
        steps: simplex_steps(x0, bounds, config.initial_step),
    };
    nelder_mead(&mut *f, x0, &opts)
}

/// Searches smoothing parameters minimizing the configured one-step error
/// over the post-warm-up window, starting from [`SmoothingParams::initial`].
pub fn find_params(
    ts: &TimeSeries,
    spec: &ModelSpec,
    config: &OptimConfig,
    seeds: &ModelState,
) -> Result<(SmoothingParams, FitResult)> {
    let r = optimize(ts, spec, config, seeds, &SmoothingParams::initial(spec))?;
    Ok((r.params, r.fit))
}

/// [`find_params`] from an explicit starting point.
pub fn find_params_from(
    ts: &TimeSeries,
    spec: &ModelSpec,
    config: &OptimConfig,
    seeds: &ModelState,
    start: &SmoothingParams,
) -> Result<(SmoothingParams, FitResult)> {
    let r = optimize(ts, spec, config, seeds, start)?;
    Ok((r.params, r.fit))
}

/// Parameter search returning the full report, including the optimizer trace.
///
/// Points outside the bounds score `1e12` plus their squared distance to
/// the box; infeasible fits score `1e12` plus the fraction of the series
/// left unprocessed. Seeds are fixed for the whole search.
pub fn optimize(
    ts: &TimeSeries,
    spec: &ModelSpec,
    config: &OptimConfig,
    seeds: &ModelState,
    start: &SmoothingParams,
) -> Result<OptimReport> {
    spec.check_series(ts)?;
    seeds.check_spec(spec)?;
    start.check_spec(spec)?;
    if ts.len() <= spec.warmup() {
        return Err(Error::SeriesTooShort {
            needed: spec.warmup() + 1,
            have: ts.len(),
        });
    }
    let bounds = config
        .bounds
        .clone()
        .unwrap_or_else(|| default_bounds(spec));
    if bounds.len() != spec.param_count() {
        return Err(Error::LengthMismatch {
            left: spec.param_count(),
            right: bounds.len(),
        });
    }
    if let Some((lo, hi)) = bounds
        .iter()
        .find(|(lo, hi)| lo > hi || !lo.is_finite() || !hi.is_finite())
    {
        return Err(Error::InvalidInput(format!("invalid bound [{lo}, {hi}]")));
    }
    if config.max_evals == 0 {
        return Err(Error::InvalidInput("max_evals must be positive".into()));
    }
    if config.objective == Objective::Mape {
        if let Some(i) = ts.values()[spec.warmup()..].iter().position(|&v| v == 0.0) {
            return Err(Error::ZeroActual {
                index: spec.warmup() + i,
            });
        }
    }

    let problem = Problem {
        ts,
        spec,
        seeds,
        objective: config.objective,
        bounds: bounds.clone(),
    };
    let mut f = |x: &[f64]| problem.evaluate(x);
    let x0 = start.resolved(spec).to_vector(spec);

    let mut trace: Vec<f64> = Vec::new();
    let mut evals = 0usize;
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    let absorb = |m: Minimum,
                  trace: &mut Vec<f64>,
                  evals: &mut usize,
                  best: &mut Option<(Vec<f64>, f64, bool)>| {
        *evals += m.evals;
        let floor = best.as_ref().map_or(f64::INFINITY, |b| b.1);
        trace.extend(m.trace.iter().map(|v| v.min(floor)));
        if best.as_ref().is_none_or(|b| m.f < b.1) {
            *best = Some((m.x, m.f, m.converged));
        }
    };

    match config.algorithm {
        Algorithm::PatternSearch => {
            let m = pattern_search(
                &mut f,
                &x0,
                config.initial_step,
                config.tolerance,
                config.max_evals,
            );
            absorb(m, &mut trace, &mut evals, &mut best);
        }
        Algorithm::NelderMead => {
            let m = run_simplex(&mut f, &x0, &bounds, config, config.max_evals);
            absorb(m, &mut trace, &mut evals, &mut best);
            // One restart from the optimum rebuilds a possibly collapsed simplex.
            if evals < config.max_evals {
                let from = best.as_ref().expect("first run recorded").0.clone();
                let m = run_simplex(&mut f, &from, &bounds, config, config.max_evals - evals);
                absorb(m, &mut trace, &mut evals, &mut best);
            }
        }
        Algorithm::RandomRestartNelderMead => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
            let runs = config.restarts + 1;
            let share = (config.max_evals / runs).max(spec.param_count() + 2);
            for run in 0..runs {
                if evals >= config.max_evals {
                    break;
                }
                let from: Vec<f64> = if run == 0 {
                    x0.clone()
                } else {
                    bounds
                        .iter()
                        .map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                        .collect()
                };
                let budget = share.min(config.max_evals - evals);
                let m = run_simplex(&mut f, &from, &bounds, config, budget);
                absorb(m, &mut trace, &mut evals, &mut best);
            }
        }
    }

    let (x, f_best, converged) = best.expect("at least one run");
    if f_best >= PENALTY || !f_best.is_finite() {
        return Err(Error::NoFeasiblePoint { evals });
    }
    let params = SmoothingParams::from_vector(spec, &x)?;
    let fit = smooth_pass(ts, spec, &params, seeds)?;
    Ok(OptimReport {
        params,
        fit,
        f_best,
        evals,
        trace,
        converged,
    })
}
