//! Seed values for the recursion.

use crate::decompose::{self, DecompositionResult, LoessConfig};
use crate::error::{Error, Result};
use crate::hw::{ModelSpec, ModelState, TrendKind};
use crate::timeseries::{Combination, DimsInit, SeasonInit, TimeSeries};

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Centered moving average of width `period` (2×period when even), defined
/// on `half..n-half`. Returns `(first_index, values)`.
fn centered_ma(w: &[f64], period: usize) -> (usize, Vec<f64>) {
    let half = period / 2;
    let n = w.len();
    let mut out = Vec::with_capacity(n.saturating_sub(2 * half));
    for t in half..n - half {
        let v = if period % 2 == 1 {
            w[t - half..=t + half].iter().sum::<f64>() / period as f64
        } else {
            let inner: f64 = w[t - half + 1..t + half].iter().sum();
            (0.5 * w[t - half] + inner + 0.5 * w[t + half]) / period as f64
        };
        out.push(v);
    }
    (half, out)
}

fn ma_indices(w: &[f64], period: usize, mode: Combination) -> Result<Vec<f64>> {
    let (first, ma) = centered_ma(w, period);
    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (k, m) in ma.iter().enumerate() {
        let t = first + k;
        let v = match mode {
            Combination::Multiplicative => {
                if *m <= 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "ratio-to-moving-average needs a positive average, got {m} at {t}"
                    )));
                }
                w[t] / m
            }
            Combination::Additive => w[t] - m,
        };
        sums[t % period] += v;
        counts[t % period] += 1;
    }
    let mut ring: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    renormalize(&mut ring, mode);
    Ok(ring)
}

/// Forces multiplicative rings to average 1 and additive rings to average 0.
fn renormalize(ring: &mut [f64], mode: Combination) {
    let m = mean(ring);
    match mode {
        Combination::Multiplicative => ring.iter_mut().for_each(|v| *v /= m),
        Combination::Additive => ring.iter_mut().for_each(|v| *v -= m),
    }
}

fn stl_season_indices(
    decomposition: &DecompositionResult,
    index: usize,
    period: usize,
    mode: Combination,
) -> Vec<f64> {
    let values = &decomposition.seasonals[index].values;
    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (t, v) in values.iter().enumerate() {
        let v = match mode {
            Combination::Additive => *v,
            Combination::Multiplicative => {
                let base = decomposition.trend[t];
                if base > 0.0 {
                    1.0 + v / base
                } else {
                    1.0
                }
            }
        };
        sums[t % period] += v;
        counts[t % period] += 1;
    }
    let mut ring: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    renormalize(&mut ring, mode);
    ring
}

fn stl_dims_indices(
    decomposition: &DecompositionResult,
    index: usize,
    mode: Combination,
) -> Vec<f64> {
    let part = &decomposition.dims[index];
    if part.occurrences.is_empty() {
        return vec![mode.neutral(); part.length];
    }
    match mode {
        Combination::Additive => part.profile.clone(),
        Combination::Multiplicative => {
            let mut slots = vec![0.0; part.length];
            for &start in &part.occurrences {
                for (slot, acc) in slots.iter_mut().enumerate() {
                    let t = start + slot;
                    let without = decomposition.trend[t]
                        + decomposition
                            .seasonals
                            .iter()
                            .map(|s| s.values[t])
                            .sum::<f64>();
                    *acc += if without > 0.0 {
                        (without + part.values[t]) / without
                    } else {
                        1.0
                    };
                }
            }
            let count = part.occurrences.len() as f64;
            slots.iter().map(|s| s / count).collect()
        }
    }
}

/// Seeds level, trend, every seasonal ring and every DIMS array from the
/// start of `ts`.
///
/// Level is the mean of the first longest cycle; trend compares it with the
/// second cycle. Regular seasonalities are seeded shortest first, each on the
/// series with the shorter ones already removed.
pub fn init_values(ts: &TimeSeries, spec: &ModelSpec) -> Result<ModelState> {
    spec.check_series(ts)?;
    let y = ts.values();
    let cycle = spec.max_cycle().max(1);
    if y.len() < 2 * cycle {
        return Err(Error::SeriesTooShort {
            needed: 2 * cycle,
            have: y.len(),
        });
    }
    let first = mean(&y[..cycle]);
    let second = mean(&y[cycle..2 * cycle]);

    let mut state = ModelState::neutral(spec, first);
    state.trend = match spec.trend {
        TrendKind::None => 0.0,
        TrendKind::Additive => (second - first) / cycle as f64,
        TrendKind::Multiplicative => {
            if first <= 0.0 || second <= 0.0 {
                return Err(Error::InvalidInput(
                    "multiplicative trend needs positive cycle means".into(),
                ));
            }
            (second / first).powf(1.0 / cycle as f64)
        }
    };

    let needs_stl = ts.seasons().iter().any(|s| s.init == SeasonInit::StlBased)
        || ts
            .dims()
            .iter()
            .any(|d| d.spec().init == DimsInit::StlBased && !d.spec().occurrences.is_empty());
    let decomposition = if needs_stl {
        Some(decompose::mstl(ts, &LoessConfig::default())?)
    } else {
        None
    };

    let mut order: Vec<usize> = (0..ts.seasons().len()).collect();
    order.sort_by_key(|&i| ts.seasons()[i].cycle_length);
    let mut working = y.to_vec();
    for i in order {
        let season = &ts.seasons()[i];
        let period = season.cycle_length;
        let ring = match season.init {
            SeasonInit::RatioToMa | SeasonInit::DifferenceToMa => {
                ma_indices(&working, period, season.mode)?
            }
            SeasonInit::StlBased => stl_season_indices(
                decomposition.as_ref().expect("decomposition computed"),
                i,
                period,
                season.mode,
            ),
        };
        for (t, w) in working.iter_mut().enumerate() {
            match season.mode {
                Combination::Multiplicative => *w /= ring[t % period],
                Combination::Additive => *w -= ring[t % period],
            }
        }
        state.seasonal[i] = ring;
    }

    for (h, dims) in ts.dims().iter().enumerate() {
        let spec = dims.spec();
        state.dims[h] = match (spec.init, decomposition.as_ref()) {
            (DimsInit::StlBased, Some(d)) => stl_dims_indices(d, h, spec.mode),
            _ => vec![spec.mode.neutral(); spec.length],
        };
    }

    let mult_values = state
        .seasonal
        .iter()
        .zip(&spec.seasons)
        .filter(|(_, s)| s.mode == Combination::Multiplicative)
        .flat_map(|(r, _)| r.iter())
        .chain(
            state
                .dims
                .iter()
                .zip(&spec.dims)
                .filter(|(_, d)| d.mode == Combination::Multiplicative)
                .flat_map(|(r, _)| r.iter()),
        );
    for v in mult_values {
        if *v <= 0.0 || !v.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-positive multiplicative seed index {v}"
            )));
        }
    }
    Ok(state)
}
