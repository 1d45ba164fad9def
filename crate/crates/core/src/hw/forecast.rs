use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::timeseries::{Combination, TimeSeries};

use super::{ModelSpec, ModelState, SmoothingParams, TrendKind};

/// Which DIMS slot, if any, each forecast step falls on.
#[derive(Debug, Clone, PartialEq)]
pub struct DimsProjection {
    origin: usize,
    horizon: usize,
    ids: Vec<String>,
    /// `slots[h][k - 1]`: within-block slot of DIMS `h` at step `origin + k - 1`.
    slots: Vec<Vec<Option<usize>>>,
}

impl DimsProjection {
    /// Projection from the occurrences registered on `ts`.
    pub fn from_series(ts: &TimeSeries, origin: usize, horizon: usize) -> Self {
        Self::with_future(ts, origin, horizon, &BTreeMap::new())
            .expect("no extra occurrences to validate")
    }

    /// Projection from the occurrences registered on `ts` plus extra block
    /// starts (absolute indices, possibly past the end of `ts`) keyed by DIMS id.
    pub fn with_future(
        ts: &TimeSeries,
        origin: usize,
        horizon: usize,
        extra: &BTreeMap<String, Vec<usize>>,
    ) -> Result<Self> {
        if let Some(unknown) = extra.keys().find(|id| ts.get_dims(id).is_none()) {
            return Err(Error::Dims {
                id: unknown.clone(),
                reason: "projection references an unregistered DIMS".into(),
            });
        }
        let end = origin + horizon;
        let mut ids = Vec::new();
        let mut slots = Vec::new();
        for dims in ts.dims() {
            let spec = dims.spec();
            let mut row = vec![None; horizon];
            let starts = spec
                .occurrences
                .iter()
                .chain(extra.get(&spec.id).into_iter().flatten());
            for &start in starts {
                let block_end = start + spec.length;
                for t in start.max(origin)..block_end.min(end) {
                    row[t - origin] = Some(t - start);
                }
            }
            ids.push(spec.id.clone());
            slots.push(row);
        }
        Ok(Self {
            origin,
            horizon,
            ids,
            slots,
        })
    }

    /// Projection with no DIMS step inside the horizon.
    pub fn empty(spec: &ModelSpec, origin: usize, horizon: usize) -> Self {
        Self {
            origin,
            horizon,
            ids: spec.dims.iter().map(|d| d.id.clone()).collect(),
            slots: vec![vec![None; horizon]; spec.dims.len()],
        }
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn slot(&self, dims: usize, k: usize) -> Option<usize> {
        self.slots[dims][k - 1]
    }

    /// Marks forecast step `k` (1-based) as slot `slot` of DIMS `dims`.
    pub fn set_slot(&mut self, dims: usize, k: usize, slot: Option<usize>) {
        self.slots[dims][k - 1] = slot;
    }
}

/// `horizon` point forecasts from `state`.
pub fn forecast(
    state: &ModelState,
    spec: &ModelSpec,
    params: &SmoothingParams,
    horizon: usize,
    projection: &DimsProjection,
) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::InvalidInput(
            "forecast horizon must be at least 1".into(),
        ));
    }
    state.check_spec(spec)?;
    params.validate()?;
    params.check_spec(spec)?;
    let expected: Vec<&str> = spec.dims.iter().map(|d| d.id.as_str()).collect();
    let got: Vec<&str> = projection.ids.iter().map(String::as_str).collect();
    if expected != got {
        let id = got
            .iter()
            .find(|id| !expected.contains(id))
            .map(|s| s.to_string())
            .unwrap_or_else(|| expected.join(","));
        return Err(Error::Dims {
            id,
            reason: "projection does not match the model's DIMS".into(),
        });
    }
    if projection.horizon < horizon || projection.origin != state.next_step {
        return Err(Error::InvalidInput(format!(
            "projection covers steps {}..{}, forecast needs {}..{}",
            projection.origin,
            projection.origin + projection.horizon,
            state.next_step,
            state.next_step + horizon
        )));
    }

    let p = params.resolved(spec);
    let origin = state.next_step;
    let mut damp_sum = 0.0;
    let mut damp_pow = 1.0;
    let mut ar_pow = 1.0;
    let mut out = Vec::with_capacity(horizon);
    for k in 1..=horizon {
        let t = origin + k - 1;
        damp_pow *= p.phi;
        damp_sum += damp_pow;
        ar_pow *= p.ar1;
        let trend_term = match spec.trend {
            TrendKind::Multiplicative => state.level * state.trend.powf(damp_sum),
            TrendKind::None | TrendKind::Additive => state.level + damp_sum * state.trend,
        };
        let mut add = 0.0;
        let mut mul = 1.0;
        for (ring, season) in state.seasonal.iter().zip(&spec.seasons) {
            let v = ring[t % season.cycle_length];
            match season.mode {
                Combination::Additive => add += v,
                Combination::Multiplicative => mul *= v,
            }
        }
        for (h, dims) in spec.dims.iter().enumerate() {
            if let Some(slot) = projection.slot(h, k) {
                let v = state.dims[h][slot];
                match dims.mode {
                    Combination::Additive => add += v,
                    Combination::Multiplicative => mul *= v,
                }
            }
        }
        out.push((trend_term + add) * mul + ar_pow * state.last_residual);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hw::{DimsComponent, SeasonComponent};
    use crate::timeseries::{DimsSpec, SeasonSpec};

    fn one_season_spec(damping: bool, ar: bool) -> ModelSpec {
        ModelSpec {
            trend: TrendKind::Additive,
            damping,
            ar_adjustment: ar,
            seasons: vec![SeasonComponent {
                id: "s".into(),
                cycle_length: 4,
                mode: Combination::Multiplicative,
            }],
            dims: vec![],
        }
    }

    fn state(level: f64, trend: f64, idx: f64) -> ModelState {
        ModelState {
            level,
            trend,
            seasonal: vec![vec![idx, 1.0, 1.0, 1.0]],
            dims: vec![],
            last_residual: 0.0,
            next_step: 0,
        }
    }

    fn params(phi: f64, ar1: f64) -> SmoothingParams {
        SmoothingParams::new(0.1, 0.1, vec![0.1], vec![], phi, ar1).unwrap()
    }

    #[test]
    fn zero_phi_removes_trend() {
        let spec = one_season_spec(true, false);
        let proj = DimsProjection::empty(&spec, 0, 1);
        let f = forecast(&state(100.0, 5.0, 1.2), &spec, &params(0.0, 0.0), 1, &proj).unwrap();
        assert!((f[0] - 120.0).abs() < 1e-12);
    }

    #[test]
    fn undamped_one_step() {
        let spec = one_season_spec(false, false);
        let proj = DimsProjection::empty(&spec, 0, 1);
        let f = forecast(&state(100.0, 2.0, 1.1), &spec, &params(1.0, 0.0), 1, &proj).unwrap();
        assert!((f[0] - 112.2).abs() < 1e-12);
    }

    #[test]
    fn ar_correction_halves() {
        let spec = one_season_spec(false, true);
        let mut s = state(10.0, 0.0, 1.0);
        s.last_residual = 4.0;
        let proj = DimsProjection::empty(&spec, 0, 4);
        let f = forecast(&s, &spec, &params(1.0, 0.5), 4, &proj).unwrap();
        for (got, want) in f.iter().zip([12.0, 11.0, 10.5, 10.25]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn damped_trend_telescopes() {
        let spec = ModelSpec {
            seasons: vec![],
            ..one_season_spec(true, false)
        };
        let s = ModelState {
            seasonal: vec![],
            ..state(50.0, 3.0, 1.0)
        };
        let p = SmoothingParams::new(0.1, 0.1, vec![], vec![], 0.8, 0.0).unwrap();
        let proj = DimsProjection::empty(&spec, 0, 10);
        let f = forecast(&s, &spec, &p, 10, &proj).unwrap();
        let mut prev = 50.0;
        for (k, v) in f.iter().enumerate() {
            let inc = v - prev;
            assert!((inc - 0.8f64.powi(k as i32 + 1) * 3.0).abs() < 1e-12);
            prev = *v;
        }
    }

    #[test]
    fn multiplicative_trend_forecast() {
        let spec = ModelSpec {
            trend: TrendKind::Multiplicative,
            seasons: vec![],
            ..one_season_spec(true, false)
        };
        let s = ModelState {
            seasonal: vec![],
            ..state(100.0, 1.01, 1.0)
        };
        let p = SmoothingParams::new(0.1, 0.1, vec![], vec![], 0.5, 0.0).unwrap();
        let proj = DimsProjection::empty(&spec, 0, 2);
        let f = forecast(&s, &spec, &p, 2, &proj).unwrap();
        assert!((f[0] - 100.0 * 1.01f64.powf(0.5)).abs() < 1e-12);
        assert!((f[1] - 100.0 * 1.01f64.powf(0.75)).abs() < 1e-12);
    }

    #[test]
    fn projection_marks_dims_slots() {
        let ts = TimeSeries::hourly(vec![1.0; 100])
            .unwrap()
            .with_season(SeasonSpec::multiplicative("s", 4))
            .unwrap()
            .with_dims(DimsSpec::new(
                "h",
                Combination::Multiplicative,
                5,
                vec![10, 58],
            ))
            .unwrap();
        let proj = DimsProjection::from_series(&ts, 60, 10);
        assert_eq!(proj.slot(0, 1), Some(2));
        assert_eq!(proj.slot(0, 3), Some(4));
        assert_eq!(proj.slot(0, 4), None);

        let mut extra = BTreeMap::new();
        extra.insert("h".to_string(), vec![102]);
        let future = DimsProjection::with_future(&ts, 100, 5, &extra).unwrap();
        assert_eq!(future.slot(0, 3), Some(0));
        assert_eq!(future.slot(0, 2), None);

        extra.insert("nope".to_string(), vec![1]);
        assert!(DimsProjection::with_future(&ts, 100, 5, &extra).is_err());

        let spec = ModelSpec::new(&ts, TrendKind::Additive, false, false);
        let mut st = ModelState::neutral(&spec, 10.0);
        st.dims[0] = vec![0.5, 0.6, 0.7, 0.8, 0.9];
        st.next_step = 60;
        let p = SmoothingParams::new(0.1, 0.1, vec![0.1], vec![0.1], 1.0, 0.0).unwrap();
        let f = forecast(&st, &spec, &p, 4, &proj).unwrap();
        assert_eq!(f, vec![7.0, 8.0, 9.0, 10.0]);
    }

    #[test]
    fn forecast_errors() {
        let spec = one_season_spec(false, false);
        let proj = DimsProjection::empty(&spec, 0, 1);
        assert!(forecast(&state(1.0, 0.0, 1.0), &spec, &params(1.0, 0.0), 0, &proj).is_err());
        assert!(forecast(&state(1.0, 0.0, 1.0), &spec, &params(1.0, 0.0), 2, &proj).is_err());
        let with_dims = ModelSpec {
            dims: vec![DimsComponent {
                id: "a".into(),
                length: 2,
                mode: Combination::Additive,
            }],
            ..spec.clone()
        };
        let mut s = state(1.0, 0.0, 1.0);
        s.dims = vec![vec![0.0, 0.0]];
        let p = SmoothingParams::new(0.1, 0.1, vec![0.1], vec![0.1], 1.0, 0.0).unwrap();
        assert!(matches!(
            forecast(&s, &with_dims, &p, 1, &proj),
            Err(Error::Dims { .. })
        ));
    }
}
