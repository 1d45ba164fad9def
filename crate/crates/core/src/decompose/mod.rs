//! Additive multiple-seasonal STL decomposition with DIMS extraction.
//!
//! Regular seasonalities are estimated by iterating classic STL over each
//! period in ascending order until the seasonal components stop moving.
//! Only then are DIMS components taken from the detrended, deseasonalized
//! residual: each DIMS gets one value per within-block slot, the plain
//! average over its occurrences, and the trend is re-smoothed with the DIMS
//! removed until both settle. The remainder closes the identity
//! `original = trend + Σ seasonal + Σ dims + remainder`.

mod export;
pub mod loess;

use chrono::{NaiveDateTime, TimeDelta};

use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

pub use export::stlplot_export;
use loess::{loess_at, loess_smooth, moving_average, next_odd};

/// Cycle-subseries smoother.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeasonalSmoother {
    /// Every cycle-subseries is replaced by its mean; seasonal components are
    /// strictly periodic and sum to zero over any full cycle.
    Periodic,
    /// Loess across cycles with the given window (odd, ≥ 3).
    Loess { window: usize, degree: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoessConfig {
    pub seasonal: SeasonalSmoother,
    /// Trend window; `None` derives it from the longest cycle.
    pub trend_window: Option<usize>,
    pub inner_iterations: usize,
    pub max_iterations: usize,
    /// Convergence threshold relative to the series scale.
    pub tolerance: f64,
}

impl Default for LoessConfig {
    fn default() -> Self {
        Self {
            seasonal: SeasonalSmoother::Periodic,
            trend_window: None,
            inner_iterations: 2,
            max_iterations: 100,
            tolerance: 1e-6,
        }
    }
}

impl LoessConfig {
    fn trend_window_for(&self, longest: usize) -> usize {
        self.trend_window.unwrap_or_else(|| {
            // classical STL rule with a 7-point seasonal window
            next_odd(1.5 * longest as f64 / (1.0 - 1.5 / 7.0))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalPart {
    pub id: String,
    pub cycle_length: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimsPart {
    pub id: String,
    pub length: usize,
    pub occurrences: Vec<usize>,
    /// Full-length component, zero outside occurrence blocks.
    pub values: Vec<f64>,
    /// Per-slot average over occurrences.
    pub profile: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub start: NaiveDateTime,
    pub step: TimeDelta,
    pub original: Vec<f64>,
    pub trend: Vec<f64>,
    /// In the order the seasons are declared on the series.
    pub seasonals: Vec<SeasonalPart>,
    pub dims: Vec<DimsPart>,
    pub remainder: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl DecompositionResult {
    pub fn timestamp(&self, i: usize) -> NaiveDateTime {
        self.start + self.step * i as i32
    }

    /// Sum of every component at `i`; equals `original[i]` up to rounding.
    pub fn reconstruct(&self, i: usize) -> f64 {
        self.trend[i]
            + self.seasonals.iter().map(|s| s.values[i]).sum::<f64>()
            + self.dims.iter().map(|d| d.values[i]).sum::<f64>()
            + self.remainder[i]
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// One STL pass for a single period. Updates `trend` in place and returns the
/// seasonal component.
fn stl_inner(
    x: &[f64],
    period: usize,
    trend: &mut Vec<f64>,
    trend_window: usize,
    cfg: &LoessConfig,
) -> Vec<f64> {
    let n = x.len();
    let low_pass_window = next_odd(period as f64);
    let mut seasonal = vec![0.0; n];
    for _ in 0..cfg.inner_iterations.max(1) {
        let detrended: Vec<f64> = x.iter().zip(trend.iter()).map(|(a, b)| a - b).collect();

        // cycle-subseries smoothing, extended by one cycle on each side
        let mut cycles = vec![0.0; n + 2 * period];
        for slot in 0..period {
            let sub: Vec<f64> = detrended[slot..].iter().step_by(period).copied().collect();
            let k = sub.len();
            let mean = sub.iter().sum::<f64>() / k as f64;
            for j in 0..k + 2 {
                let e = slot + j * period;
                if e >= cycles.len() {
                    break;
                }
                cycles[e] = match cfg.seasonal {
                    SeasonalSmoother::Periodic => mean,
                    SeasonalSmoother::Loess { window, degree } => {
                        loess_at(&sub, j as f64 - 1.0, window, degree)
                    }
                };
            }
        }

        let low = moving_average(&moving_average(&moving_average(&cycles, period), period), 3);
        let low = loess_smooth(&low, low_pass_window, 1);
        for t in 0..n {
            seasonal[t] = cycles[period + t] - low[t];
        }
        let deseasonalized: Vec<f64> = x.iter().zip(&seasonal).map(|(a, b)| a - b).collect();
        *trend = loess_smooth(&deseasonalized, trend_window, 1);
    }
    seasonal
}

fn series_scale(values: &[f64]) -> f64 {
    let m = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// Decomposes `ts` over every declared seasonality and DIMS.
pub fn mstl(ts: &TimeSeries, cfg: &LoessConfig) -> Result<DecompositionResult> {
    let y = ts.values();
    let n = y.len();
    for season in ts.seasons() {
        if n < 2 * season.cycle_length {
            return Err(Error::SeriesTooShort {
                needed: 2 * season.cycle_length,
                have: n,
            });
        }
    }
    if let SeasonalSmoother::Loess { window, .. } = cfg.seasonal {
        if window < 3 || window % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "seasonal loess window must be odd and >= 3, got {window}"
            )));
        }
    }
    let scale = series_scale(y);
    let longest = ts.max_cycle().unwrap_or(1);
    let trend_window = cfg.trend_window_for(longest);

    let mut order: Vec<usize> = (0..ts.seasons().len()).collect();
    order.sort_by_key(|&i| ts.seasons()[i].cycle_length);

    let mut seasonals = vec![vec![0.0; n]; ts.seasons().len()];
    let mut trend = vec![0.0; n];
    let mut deseasonalized = y.to_vec();
    let mut converged = order.is_empty();
    let mut iterations = 0;

    if order.is_empty() {
        trend = loess_smooth(y, trend_window, 1);
    } else {
        while iterations < cfg.max_iterations.max(1) {
            iterations += 1;
            let mut change = 0.0f64;
            for &i in &order {
                let period = ts.seasons()[i].cycle_length;
                let x: Vec<f64> = deseasonalized
                    .iter()
                    .zip(&seasonals[i])
                    .map(|(d, s)| d + s)
                    .collect();
                let fresh = stl_inner(&x, period, &mut trend, trend_window, cfg);
                change = change.max(max_abs_diff(&fresh, &seasonals[i]));
                deseasonalized = x.iter().zip(&fresh).map(|(a, b)| a - b).collect();
                seasonals[i] = fresh;
            }
            if iterations > 1 && change < cfg.tolerance * scale {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        log::warn!("mstl: no convergence after {iterations} iterations");
    }

    let dims_specs: Vec<_> = ts.dims().iter().map(|d| d.spec().clone()).collect();
    let mut dims_values = vec![vec![0.0; n]; dims_specs.len()];
    let mut profiles: Vec<Vec<f64>> = dims_specs.iter().map(|d| vec![0.0; d.length]).collect();
    let any_occurrence = dims_specs.iter().any(|d| !d.occurrences.is_empty());
    if any_occurrence {
        let mut dims_converged = false;
        for _ in 0..cfg.max_iterations.max(1) {
            let mut change = 0.0f64;
            for h in 0..dims_specs.len() {
                let spec = &dims_specs[h];
                if spec.occurrences.is_empty() {
                    continue;
                }
                let mut profile = vec![0.0; spec.length];
                for &start in &spec.occurrences {
                    for (slot, acc) in profile.iter_mut().enumerate() {
                        let t = start + slot;
                        let others: f64 = (0..dims_specs.len())
                            .filter(|&m| m != h)
                            .map(|m| dims_values[m][t])
                            .sum();
                        *acc += deseasonalized[t] - trend[t] - others;
                    }
                }
                let count = spec.occurrences.len() as f64;
                for v in &mut profile {
                    *v /= count;
                }
                change = change.max(max_abs_diff(&profile, &profiles[h]));
                for &start in &spec.occurrences {
                    dims_values[h][start..start + spec.length].copy_from_slice(&profile);
                }
                profiles[h] = profile;
            }
            let adjusted: Vec<f64> = (0..n)
                .map(|t| deseasonalized[t] - dims_values.iter().map(|d| d[t]).sum::<f64>())
                .collect();
            let fresh = loess_smooth(&adjusted, trend_window, 1);
            change = change.max(max_abs_diff(&fresh, &trend));
            trend = fresh;
            if change < cfg.tolerance * scale {
                dims_converged = true;
                break;
            }
        }
        if !dims_converged {
            log::warn!("mstl: DIMS extraction did not converge");
        }
        converged &= dims_converged;
    }

    let remainder: Vec<f64> = (0..n)
        .map(|t| {
            y[t] - trend[t]
                - seasonals.iter().map(|s| s[t]).sum::<f64>()
                - dims_values.iter().map(|d| d[t]).sum::<f64>()
        })
        .collect();

    Ok(DecompositionResult {
        start: ts.start(),
        step: ts.step(),
        original: y.to_vec(),
        trend,
        seasonals: ts
            .seasons()
            .iter()
            .zip(seasonals)
            .map(|(s, values)| SeasonalPart {
                id: s.id.clone(),
                cycle_length: s.cycle_length,
                values,
            })
            .collect(),
        dims: dims_specs
            .into_iter()
            .zip(dims_values)
            .zip(profiles)
            .map(|((spec, values), profile)| DimsPart {
                id: spec.id,
                length: spec.length,
                occurrences: spec.occurrences,
                values,
                profile,
            })
            .collect(),
        remainder,
        converged,
        iterations,
    })
}

/// Single-seasonality decomposition without DIMS.
pub fn stl(ts: &TimeSeries, season_id: &str, cfg: &LoessConfig) -> Result<DecompositionResult> {
    let season = ts
        .seasons()
        .iter()
        .find(|s| s.id == season_id)
        .ok_or_else(|| Error::InvalidInput(format!("unknown season `{season_id}`")))?;
    let single = TimeSeries::new(ts.start(), ts.step(), ts.values().to_vec())?
        .with_season(season.clone())?;
    mstl(&single, cfg)
}
