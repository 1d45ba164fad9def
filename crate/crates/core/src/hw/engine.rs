use crate::error::{Error, Result};
use crate::timeseries::{metrics, Combination, DimsRecurrence, TimeSeries};

use super::{ModelSpec, ModelState, SmoothingParams, TrendKind};

/// Outcome of one in-sample pass.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub final_state: ModelState,
    /// One-step-ahead forecasts, AR correction included, for every step.
    pub fitted: Vec<f64>,
    /// `actual - fitted` for every step.
    pub one_step_errors: Vec<f64>,
    pub actuals: Vec<f64>,
    /// First step that counts towards the objective.
    pub warmup: usize,
    /// RMSE of `fitted` against `actuals` from `warmup` on.
    pub objective: f64,
    /// Parameters after forcing disabled features.
    pub params: SmoothingParams,
    /// Free parameter count of the model structure.
    pub n_params: usize,
}

impl FitResult {
    pub fn scored_actuals(&self) -> &[f64] {
        &self.actuals[self.warmup..]
    }

    pub fn scored_fitted(&self) -> &[f64] {
        &self.fitted[self.warmup..]
    }

    pub fn scored_errors(&self) -> &[f64] {
        &self.one_step_errors[self.warmup..]
    }
}

pub(crate) struct StepOutput {
    pub fitted: f64,
}

/// One configured recursion over a series' DIMS tables.
pub(crate) struct Recursion<'a> {
    spec: &'a ModelSpec,
    params: SmoothingParams,
    recurrences: Vec<&'a DimsRecurrence>,
    guard_positive: bool,
}

fn infeasible(step: usize, reason: impl Into<String>) -> Error {
    Error::InfeasibleFit {
        step,
        reason: reason.into(),
    }
}

impl<'a> Recursion<'a> {
    pub(crate) fn new(
        ts: &'a TimeSeries,
        spec: &'a ModelSpec,
        params: &SmoothingParams,
    ) -> Result<Self> {
        spec.check_series(ts)?;
        params.validate()?;
        params.check_spec(spec)?;
        Ok(Self {
            spec,
            params: params.resolved(spec),
            recurrences: ts.dims().iter().map(|d| d.recurrence()).collect(),
            guard_positive: spec.has_multiplicative(),
        })
    }

    pub(crate) fn params(&self) -> &SmoothingParams {
        &self.params
    }

    /// Absorbs observation `y` at absolute step `t = state.next_step`.
    pub(crate) fn step(&self, state: &mut ModelState, y: f64) -> Result<StepOutput> {
        let t = state.next_step;
        let p = &self.params;

        let mut sa = 0.0;
        let mut sm = 1.0;
        for (ring, season) in state.seasonal.iter().zip(&self.spec.seasons) {
            let v = ring[t % season.cycle_length];
            match season.mode {
                Combination::Additive => sa += v,
                Combination::Multiplicative => sm *= v,
            }
        }
        let mut da = 0.0;
        let mut dm = 1.0;
        let mut active: Vec<(usize, usize)> = Vec::new();
        for (h, (rec, dims)) in self.recurrences.iter().zip(&self.spec.dims).enumerate() {
            if let Some(pos) = rec.at(t) {
                let v = state.dims[h][pos.slot];
                match dims.mode {
                    Combination::Additive => da += v,
                    Combination::Multiplicative => dm *= v,
                }
                active.push((h, pos.slot));
            }
        }

        let (level, trend) = (state.level, state.trend);
        let trend_term = match self.spec.trend {
            TrendKind::Multiplicative => level * trend.powf(p.phi),
            TrendKind::None | TrendKind::Additive => level + p.phi * trend,
        };
        let base = (trend_term + sa + da) * sm * dm;
        let fitted = base + p.ar1 * state.last_residual;
        let residual = y - base;

        let scale = sm * dm;
        let new_level = p.alpha * (y / scale - sa - da) + (1.0 - p.alpha) * trend_term;
        if !new_level.is_finite() || (self.guard_positive && new_level <= 0.0) {
            return Err(infeasible(t, format!("level became {new_level}")));
        }
        let new_trend = match self.spec.trend {
            TrendKind::Multiplicative => {
                let r = p.gamma * (new_level / level) + (1.0 - p.gamma) * trend.powf(p.phi);
                if !r.is_finite() || r <= 0.0 {
                    return Err(infeasible(t, format!("growth rate became {r}")));
                }
                r
            }
            TrendKind::None | TrendKind::Additive => {
                p.gamma * (new_level - level) + (1.0 - p.gamma) * p.phi * trend
            }
        };

        // All index targets are computed from the pre-update indices.
        let mut seasonal_updates = Vec::with_capacity(self.spec.seasons.len());
        for (i, season) in self.spec.seasons.iter().enumerate() {
            let slot = t % season.cycle_length;
            let old = state.seasonal[i][slot];
            let target = match season.mode {
                Combination::Additive => y / scale - new_level - (sa - old) - da,
                Combination::Multiplicative => {
                    let others = self.product_without(state, t, i);
                    y / ((new_level + sa + da) * others * dm)
                }
            };
            let updated = p.deltas[i] * target + (1.0 - p.deltas[i]) * old;
            self.check_index(t, season.mode, updated)?;
            seasonal_updates.push((i, slot, updated));
        }
        let mut dims_updates = Vec::with_capacity(active.len());
        for &(h, slot) in &active {
            let old = state.dims[h][slot];
            let target = match self.spec.dims[h].mode {
                Combination::Additive => y / scale - new_level - sa - (da - old),
                Combination::Multiplicative => {
                    let others: f64 = active
                        .iter()
                        .filter(|&&(m, _)| {
                            m != h && self.spec.dims[m].mode == Combination::Multiplicative
                        })
                        .map(|&(m, s)| state.dims[m][s])
                        .product();
                    y / ((new_level + sa + da) * sm * others)
                }
            };
            let updated = p.deltas_dims[h] * target + (1.0 - p.deltas_dims[h]) * old;
            self.check_index(t, self.spec.dims[h].mode, updated)?;
            dims_updates.push((h, slot, updated));
        }

        state.level = new_level;
        state.trend = new_trend;
        for (i, slot, v) in seasonal_updates {
            state.seasonal[i][slot] = v;
        }
        for (h, slot, v) in dims_updates {
            state.dims[h][slot] = v;
        }
        state.last_residual = residual;
        state.next_step = t + 1;
        Ok(StepOutput { fitted })
    }

    fn product_without(&self, state: &ModelState, t: usize, skip: usize) -> f64 {
        self.spec
            .seasons
            .iter()
            .enumerate()
            .filter(|&(j, s)| j != skip && s.mode == Combination::Multiplicative)
            .map(|(j, s)| state.seasonal[j][t % s.cycle_length])
            .product()
    }

    fn check_index(&self, t: usize, mode: Combination, v: f64) -> Result<()> {
        if !v.is_finite() || (mode == Combination::Multiplicative && v <= 0.0) {
            return Err(infeasible(t, format!("seasonal index became {v}")));
        }
        Ok(())
    }
}

/// Runs the recursion over every observation of `ts`, starting from `seeds`.
///
/// Fails with [`Error::InfeasibleFit`] as soon as a multiplicative
/// configuration drives the level, growth rate or an index to a
/// non-positive value.
pub fn smooth_pass(
    ts: &TimeSeries,
    spec: &ModelSpec,
    params: &SmoothingParams,
    seeds: &ModelState,
) -> Result<FitResult> {
    let recursion = Recursion::new(ts, spec, params)?;
    seeds.check_spec(spec)?;
    if seeds.next_step != 0 {
        return Err(Error::InvalidInput(format!(
            "seeds must describe step 0, got step {}",
            seeds.next_step
        )));
    }
    let warmup = spec.warmup();
    if ts.len() <= warmup {
        return Err(Error::SeriesTooShort {
            needed: warmup + 1,
            have: ts.len(),
        });
    }

    let mut state = seeds.clone();
    let mut fitted = Vec::with_capacity(ts.len());
    let mut errors = Vec::with_capacity(ts.len());
    for &y in ts.values() {
        let out = recursion.step(&mut state, y)?;
        fitted.push(out.fitted);
        errors.push(y - out.fitted);
    }
    let actuals = ts.values().to_vec();
    let objective = metrics::rmse(&actuals[warmup..], &fitted[warmup..])?;
    Ok(FitResult {
        final_state: state,
        fitted,
        one_step_errors: errors,
        actuals,
        warmup,
        objective,
        params: recursion.params().clone(),
        n_params: spec.param_count(),
    })
}
