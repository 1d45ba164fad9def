//! Multi-seasonal time-series container.
//!
//! A [`TimeSeries`] holds a gap-free, fixed-step sequence of observations
//! together with the regular seasonalities declared on it, a registry of
//! discrete-interval moving seasonalities (DIMS) and a bag of aligned
//! covariates. The smoothing engine, the decomposition and the evaluation
//! harness all read their structure from here.

mod dims;
pub mod metrics;

use std::collections::BTreeMap;

use chrono::{NaiveDate, NaiveDateTime, TimeDelta};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dims::{Dims, DimsInit, DimsPosition, DimsRecurrence, DimsSpec};
pub use metrics::{aic, ape, mape, rmse};

/// How a seasonal component combines with the level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combination {
    Additive,
    Multiplicative,
}

impl Combination {
    /// Value at which an index of this kind has no effect.
    pub fn neutral(self) -> f64 {
        match self {
            Combination::Additive => 0.0,
            Combination::Multiplicative => 1.0,
        }
    }
}

/// Seed method for a regular seasonality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeasonInit {
    /// Ratio of observations to a centered moving average (multiplicative).
    RatioToMa,
    /// Difference between observations and a centered moving average (additive).
    DifferenceToMa,
    /// Per-slot average of the seasonal component of a Loess decomposition.
    StlBased,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonSpec {
    pub id: String,
    pub cycle_length: usize,
    pub mode: Combination,
    pub init: SeasonInit,
}

impl SeasonSpec {
    /// Creates a seasonality with the moving-average seed method matching `mode`.
    pub fn new(id: impl Into<String>, cycle_length: usize, mode: Combination) -> Self {
        let init = match mode {
            Combination::Additive => SeasonInit::DifferenceToMa,
            Combination::Multiplicative => SeasonInit::RatioToMa,
        };
        Self {
            id: id.into(),
            cycle_length,
            mode,
            init,
        }
    }

    pub fn additive(id: impl Into<String>, cycle_length: usize) -> Self {
        Self::new(id, cycle_length, Combination::Additive)
    }

    pub fn multiplicative(id: impl Into<String>, cycle_length: usize) -> Self {
        Self::new(id, cycle_length, Combination::Multiplicative)
    }

    pub fn with_init(mut self, init: SeasonInit) -> Self {
        self.init = init;
        self
    }

    fn validate(&self, series_len: usize) -> Result<()> {
        if self.cycle_length < 2 {
            return Err(Error::InvalidInput(format!(
                "season `{}`: cycle length {} < 2",
                self.id, self.cycle_length
            )));
        }
        if self.cycle_length > series_len {
            return Err(Error::InvalidInput(format!(
                "season `{}`: cycle length {} exceeds series length {}",
                self.id, self.cycle_length, series_len
            )));
        }
        let mismatch = matches!(
            (self.mode, self.init),
            (Combination::Additive, SeasonInit::RatioToMa)
                | (Combination::Multiplicative, SeasonInit::DifferenceToMa)
        );
        if mismatch {
            return Err(Error::InvalidInput(format!(
                "season `{}`: init method {:?} does not fit {:?} mode",
                self.id, self.init, self.mode
            )));
        }
        Ok(())
    }
}

/// Fixed-step observation sequence with seasonal structure attached.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    start: NaiveDateTime,
    step: TimeDelta,
    values: Vec<f64>,
    seasons: Vec<SeasonSpec>,
    dims: Vec<Dims>,
    covariates: BTreeMap<String, Vec<f64>>,
}

impl TimeSeries {
    pub fn new(start: NaiveDateTime, step: TimeDelta, values: Vec<f64>) -> Result<Self> {
        if step <= TimeDelta::zero() {
            return Err(Error::InvalidInput("step must be positive".into()));
        }
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at index {i}"
            )));
        }
        Ok(Self {
            start,
            step,
            values,
            seasons: Vec::new(),
            dims: Vec::new(),
            covariates: BTreeMap::new(),
        })
    }

    /// Hourly series starting at 2000-01-01T00:00.
    pub fn hourly(values: Vec<f64>) -> Result<Self> {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1)
            .and_then(|d| d.and_hms_opt(0, 0, 0))
            .expect("valid date");
        Self::new(start, TimeDelta::hours(1), values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn step(&self) -> TimeDelta {
        self.step
    }

    /// Timestamp of position `i`; valid past the end of the series too.
    pub fn timestamp(&self, i: usize) -> NaiveDateTime {
        self.start + self.step * i as i32
    }

    pub fn timestamps(&self) -> impl Iterator<Item = NaiveDateTime> + '_ {
        (0..self.len()).map(|i| self.timestamp(i))
    }

    /// Index of the first step at or after `instant`, which may lie past the end.
    pub fn index_at_or_after(&self, instant: NaiveDateTime) -> Option<usize> {
        let offset = (instant - self.start).num_milliseconds();
        if offset < 0 {
            return None;
        }
        let step = self.step.num_milliseconds();
        Some(((offset + step - 1) / step) as usize)
    }

    pub fn seasons(&self) -> &[SeasonSpec] {
        &self.seasons
    }

    pub fn max_cycle(&self) -> Option<usize> {
        self.seasons.iter().map(|s| s.cycle_length).max()
    }

    pub fn add_season(&mut self, spec: SeasonSpec) -> Result<()> {
        spec.validate(self.len())?;
        if let Some(other) = self
            .seasons
            .iter()
            .find(|s| s.id == spec.id || s.cycle_length == spec.cycle_length)
        {
            return Err(Error::InvalidInput(format!(
                "season `{}` (cycle {}) clashes with existing season `{}` (cycle {})",
                spec.id, spec.cycle_length, other.id, other.cycle_length
            )));
        }
        self.seasons.push(spec);
        Ok(())
    }

    pub fn with_season(mut self, spec: SeasonSpec) -> Result<Self> {
        self.add_season(spec)?;
        Ok(self)
    }

    pub fn remove_season(&mut self, id: &str) -> Result<SeasonSpec> {
        let pos = self
            .seasons
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| Error::InvalidInput(format!("unknown season `{id}`")))?;
        Ok(self.seasons.remove(pos))
    }

    pub fn dims(&self) -> &[Dims] {
        &self.dims
    }

    pub fn get_dims(&self, id: &str) -> Option<&Dims> {
        self.dims.iter().find(|d| d.spec().id == id)
    }

    /// Registers a DIMS and computes its recurrence table.
    pub fn add_dims(&mut self, spec: DimsSpec) -> Result<()> {
        if self.dims.iter().any(|d| d.spec().id == spec.id) {
            return Err(Error::Dims {
                id: spec.id,
                reason: "duplicate id".into(),
            });
        }
        let dims = Dims::new(spec, self.len())?;
        self.dims.push(dims);
        Ok(())
    }

    pub fn with_dims(mut self, spec: DimsSpec) -> Result<Self> {
        self.add_dims(spec)?;
        Ok(self)
    }

    /// Replaces a registered DIMS in place, keeping its registry position.
    pub fn modify_dims(&mut self, spec: DimsSpec) -> Result<()> {
        let pos = self
            .dims
            .iter()
            .position(|d| d.spec().id == spec.id)
            .ok_or_else(|| Error::Dims {
                id: spec.id.clone(),
                reason: "not registered".into(),
            })?;
        self.dims[pos] = Dims::new(spec, self.len())?;
        Ok(())
    }

    pub fn remove_dims(&mut self, id: &str) -> Result<DimsSpec> {
        let pos = self
            .dims
            .iter()
            .position(|d| d.spec().id == id)
            .ok_or_else(|| Error::Dims {
                id: id.to_string(),
                reason: "not registered".into(),
            })?;
        Ok(self.dims.remove(pos).into_spec())
    }

    pub fn covariates(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.covariates
    }

    pub fn covariate(&self, name: &str) -> Option<&[f64]> {
        self.covariates.get(name).map(Vec::as_slice)
    }

    pub fn add_covariate(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: values.len(),
            });
        }
        self.covariates.insert(name.into(), values);
        Ok(())
    }

    pub fn remove_covariate(&mut self, name: &str) -> Option<Vec<f64>> {
        self.covariates.remove(name)
    }

    /// Same structure over a replacement value vector of equal length.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at index {i}"
            )));
        }
        Ok(Self {
            values,
            ..self.clone()
        })
    }

    /// Prefix `[0, end)`. DIMS occurrences that do not fit wholly inside the
    /// prefix are dropped; partial blocks are never kept.
    pub fn head(&self, end: usize) -> Result<Self> {
        if end == 0 || end > self.len() {
            return Err(Error::InvalidInput(format!(
                "prefix length {end} outside 1..={}",
                self.len()
            )));
        }
        let mut out = Self::new(self.start, self.step, self.values[..end].to_vec())?;
        for season in &self.seasons {
            out.add_season(season.clone())?;
        }
        for dims in &self.dims {
            let spec = dims.spec();
            let kept = spec
                .occurrences
                .iter()
                .copied()
                .filter(|&s| s + spec.length <= end)
                .collect();
            out.add_dims(DimsSpec {
                occurrences: kept,
                ..spec.clone()
            })?;
        }
        for (name, cov) in &self.covariates {
            out.covariates.insert(name.clone(), cov[..end].to_vec());
        }
        Ok(out)
    }
}
