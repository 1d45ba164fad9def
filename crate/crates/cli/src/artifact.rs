//! Saved fits (`model.json`).

use std::path::Path;

use chrono::{NaiveDateTime, TimeDelta};
use hwdims::{ModelSpec, ModelState, SmoothingParams, TimeSeries};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Where the fitted series sits on the time axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesInfo {
    pub start: NaiveDateTime,
    pub step_seconds: i64,
    pub n_obs: usize,
}

impl SeriesInfo {
    pub fn of(ts: &TimeSeries) -> Self {
        Self {
            start: ts.start(),
            step_seconds: ts.step().num_seconds(),
            n_obs: ts.len(),
        }
    }

    pub fn step(&self) -> TimeDelta {
        TimeDelta::seconds(self.step_seconds)
    }
}

/// Everything needed to forecast from the end of a fitted series.
/// `state.next_step` equals `series.n_obs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub schema_version: u32,
    pub spec: ModelSpec,
    pub params: SmoothingParams,
    pub state: ModelState,
    pub series: SeriesInfo,
}

impl ModelArtifact {
    pub fn new(
        spec: ModelSpec,
        params: SmoothingParams,
        state: ModelState,
        ts: &TimeSeries,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            spec,
            params,
            state,
            series: SeriesInfo::of(ts),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("artifact serializes")
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        #[derive(Deserialize)]
        struct Version {
            schema_version: u32,
        }
        let v: Version = serde_json::from_str(text)
            .map_err(|e| CliError::Data(format!("model artifact: {e}")))?;
        if v.schema_version != SCHEMA_VERSION {
            return Err(CliError::Data(format!(
                "model artifact schema {} unsupported (expected {SCHEMA_VERSION})",
                v.schema_version
            )));
        }
        let a: Self = serde_json::from_str(text)
            .map_err(|e| CliError::Data(format!("model artifact: {e}")))?;
        a.params.check_spec(&a.spec)?;
        a.state.check_spec(&a.spec)?;
        if a.state.next_step != a.series.n_obs {
            return Err(CliError::Data(format!(
                "model artifact state ends at step {} but the series has {} observations",
                a.state.next_step, a.series.n_obs
            )));
        }
        Ok(a)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read model {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Rejects a series or model layout other than the one that was fitted.
    pub fn check_matches(&self, ts: &TimeSeries, spec: &ModelSpec) -> CliResult<()> {
        if &self.spec != spec {
            return Err(CliError::Data(
                "model artifact spec differs from the configured model".into(),
            ));
        }
        if self.series != SeriesInfo::of(ts) {
            return Err(CliError::Data(format!(
                "model artifact was fitted on {} observations from {} every {}s; data has {} from {} every {}s",
                self.series.n_obs,
                self.series.start,
                self.series.step_seconds,
                ts.len(),
                ts.start(),
                ts.step().num_seconds()
            )));
        }
        Ok(())
    }
}
