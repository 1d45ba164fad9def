//! Rolling-origin forecast grids and in-sample accuracy reports.

use std::io::Write;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hw::engine::Recursion;
use crate::hw::{forecast, DimsProjection, FitResult, ModelSpec, ModelState, SmoothingParams};
use crate::optimize::{find_params_from, init_values, OptimConfig};
use crate::timeseries::{metrics, TimeSeries};

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// How each origin obtains its smoothing parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamsPolicy {
    /// Same parameters everywhere; seeds come from the data before the first origin.
    Fixed(SmoothingParams),
    /// Fresh seeds and a new search on `[0, origin)` at every origin,
    /// warm-started from the previous origin's parameters.
    RefitPerOrigin(OptimConfig),
}

/// Forecasts and actuals indexed by `[origin][horizon step - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastGrid {
    pub origins: Vec<usize>,
    pub origin_timestamps: Vec<NaiveDateTime>,
    pub horizon: usize,
    pub forecasts: Vec<Vec<f64>>,
    pub actuals: Vec<Vec<f64>>,
    pub per_origin_mape: Vec<f64>,
    pub per_horizon_mape: Vec<f64>,
    /// Parameters used at each origin.
    pub params: Vec<SmoothingParams>,
}

impl ForecastGrid {
    fn build(
        ts: &TimeSeries,
        origins: Vec<usize>,
        horizon: usize,
        forecasts: Vec<Vec<f64>>,
        params: Vec<SmoothingParams>,
    ) -> Result<Self> {
        let actuals: Vec<Vec<f64>> = origins
            .iter()
            .map(|&o| ts.values()[o..o + horizon].to_vec())
            .collect();
        let per_origin_mape = actuals
            .iter()
            .zip(&forecasts)
            .map(|(a, f)| metrics::mape(a, f))
            .collect::<Result<Vec<_>>>()?;
        let per_horizon_mape = (0..horizon)
            .map(|k| {
                let a: Vec<f64> = actuals.iter().map(|r| r[k]).collect();
                let f: Vec<f64> = forecasts.iter().map(|r| r[k]).collect();
                metrics::mape(&a, &f)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            origin_timestamps: origins.iter().map(|&o| ts.timestamp(o)).collect(),
            origins,
            horizon,
            forecasts,
            actuals,
            per_origin_mape,
            per_horizon_mape,
            params,
        })
    }

    /// MAPE over every (actual, forecast) pair of the grid.
    pub fn grand_mape(&self) -> f64 {
        let a: Vec<f64> = self.actuals.iter().flatten().copied().collect();
        let f: Vec<f64> = self.forecasts.iter().flatten().copied().collect();
        metrics::mape(&a, &f).expect("actuals checked nonzero at construction")
    }

    /// Writes `origin_timestamp,horizon_step,actual,forecast,ape` rows.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "origin_timestamp,horizon_step,actual,forecast,ape")?;
        for (i, ts) in self.origin_timestamps.iter().enumerate() {
            let ape = metrics::ape(&self.actuals[i], &self.forecasts[i])?;
            for (k, e) in ape.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    ts.format(TIMESTAMP_FORMAT),
                    k + 1,
                    self.actuals[i][k],
                    self.forecasts[i][k],
                    e
                )?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Origins `first_origin, first_origin + step, ...` whose horizon window
/// ends inside the series.
pub fn rolling_origins(len: usize, first_origin: usize, step: usize, horizon: usize) -> Vec<usize> {
    if step == 0 {
        return Vec::new();
    }
    (first_origin..)
        .step_by(step)
        .take_while(|o| o + horizon <= len)
        .collect()
}

/// Rolling-origin evaluation: at each origin `o`, fit on `[0, o)` and
/// forecast `horizon` steps. Origins whose window passes the series end are
/// dropped.
pub fn mforecast(
    ts: &TimeSeries,
    spec: &ModelSpec,
    policy: &ParamsPolicy,
    first_origin: usize,
    step: usize,
    horizon: usize,
) -> Result<ForecastGrid> {
    if step == 0 {
        return Err(Error::InvalidInput("origin step must be positive".into()));
    }
    let origins = rolling_origins(ts.len(), first_origin, step, horizon);
    mforecast_at(ts, spec, policy, &origins, horizon)
}

/// [`mforecast`] over an explicit, strictly increasing origin list.
pub fn mforecast_at(
    ts: &TimeSeries,
    spec: &ModelSpec,
    policy: &ParamsPolicy,
    origins: &[usize],
    horizon: usize,
) -> Result<ForecastGrid> {
    spec.check_series(ts)?;
    if horizon == 0 {
        return Err(Error::InvalidInput(
            "forecast horizon must be at least 1".into(),
        ));
    }
    if origins.is_empty() {
        return Err(Error::InvalidInput("no valid forecast origin".into()));
    }
    if origins.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "origins must be strictly increasing".into(),
        ));
    }
    let min_origin = spec.warmup() + spec.max_cycle().max(1);
    let first = origins[0];
    let last = *origins.last().expect("non-empty");
    if first < min_origin {
        return Err(Error::SeriesTooShort {
            needed: min_origin,
            have: first,
        });
    }
    if last + horizon > ts.len() {
        return Err(Error::SeriesTooShort {
            needed: last + horizon,
            have: ts.len(),
        });
    }

    let (forecasts, params) = match policy {
        ParamsPolicy::Fixed(p) => fixed_grid(ts, spec, p, origins, horizon)?,
        ParamsPolicy::RefitPerOrigin(cfg) => refit_grid(ts, spec, cfg, origins, horizon)?,
    };
    ForecastGrid::build(ts, origins.to_vec(), horizon, forecasts, params)
}

/// One pass over the series with state snapshots at each origin. The
/// recursion at step `t` reads only `y[t]` and the known calendar.
fn fixed_grid(
    ts: &TimeSeries,
    spec: &ModelSpec,
    params: &SmoothingParams,
    origins: &[usize],
    horizon: usize,
) -> Result<(Vec<Vec<f64>>, Vec<SmoothingParams>)> {
    let seeds = init_values(&ts.head(origins[0])?, spec)?;
    let recursion = Recursion::new(ts, spec, params)?;
    let mut state = seeds;
    let mut forecasts = Vec::with_capacity(origins.len());
    for &o in origins {
        while state.next_step < o {
            let y = ts.values()[state.next_step];
            recursion.step(&mut state, y)?;
        }
        let projection = DimsProjection::from_series(ts, o, horizon);
        forecasts.push(forecast(&state, spec, params, horizon, &projection)?);
    }
    Ok((forecasts, vec![recursion.params().clone(); origins.len()]))
}

fn refit_grid(
    ts: &TimeSeries,
    spec: &ModelSpec,
    cfg: &OptimConfig,
    origins: &[usize],
    horizon: usize,
) -> Result<(Vec<Vec<f64>>, Vec<SmoothingParams>)> {
    let mut start = SmoothingParams::initial(spec);
    let mut forecasts = Vec::with_capacity(origins.len());
    let mut used = Vec::with_capacity(origins.len());
    for &o in origins {
        let window = ts.head(o)?;
        let seeds: ModelState = init_values(&window, spec)?;
        let (params, fit) = find_params_from(&window, spec, cfg, &seeds, &start)?;
        let projection = DimsProjection::from_series(ts, o, horizon);
        forecasts.push(forecast(
            &fit.final_state,
            spec,
            &params,
            horizon,
            &projection,
        )?);
        start = params.clone();
        used.push(params);
    }
    Ok((forecasts, used))
}

/// In-sample accuracy over the post-warm-up window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub rmse: f64,
    /// `None` when an actual in the window is zero.
    pub mape: Option<f64>,
    /// `None` for a perfect fit, where the Gaussian likelihood degenerates.
    pub aic: Option<f64>,
    pub params: SmoothingParams,
    pub warmup: usize,
    /// Observations scored.
    pub n: usize,
    pub n_params: usize,
}

pub fn accuracy(fit: &FitResult) -> AccuracyReport {
    let actual = fit.scored_actuals();
    let fitted = fit.scored_fitted();
    let sse: f64 = fit.scored_errors().iter().map(|e| e * e).sum();
    AccuracyReport {
        rmse: metrics::rmse(actual, fitted).unwrap_or(f64::NAN),
        mape: metrics::mape(actual, fitted).ok(),
        aic: metrics::aic(sse, actual.len(), fit.n_params).ok(),
        params: fit.params.clone(),
        warmup: fit.warmup,
        n: actual.len(),
        n_params: fit.n_params,
    }
}
