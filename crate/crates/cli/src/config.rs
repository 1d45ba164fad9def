//! TOML run configuration.
//!
//! ```toml
//! data = "load.csv"
//! calendar = "holidays.csv"
//! trend = "additive"
//! damping = false
//! ar_adjustment = true
//!
//! [[season]]
//! id = "day"
//! cycle = 24
//! mode = "multiplicative"
//!
//! [[dims]]
//! group = "holiday"
//! mode = "multiplicative"
//!
//! [optimizer]
//! seed = 7
//!
//! [forecast]
//! horizon = 24
//!
//! [evaluate]
//! first_origin = 336
//! step = 24
//! horizon = 24
//! ```

use std::path::{Path, PathBuf};

use chrono::TimeDelta;
use hwdims::decompose::{LoessConfig, SeasonalSmoother};
use hwdims::hw::TrendKind;
use hwdims::optimize::{Algorithm, Objective, OptimConfig};
use hwdims::timeseries::{DimsInit, SeasonInit};
use hwdims::Combination;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeasonEntry {
    pub id: String,
    pub cycle: usize,
    pub mode: Combination,
    /// Defaults to the moving-average method matching `mode`.
    pub init: Option<SeasonInit>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimsEntry {
    /// Calendar group whose events form this DIMS.
    pub group: String,
    pub mode: Combination,
    #[serde(default = "default_dims_init")]
    pub init: DimsInit,
}

fn default_dims_init() -> DimsInit {
    DimsInit::StlBased
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub algorithm: Algorithm,
    pub objective: Objective,
    pub max_evals: usize,
    pub tolerance: f64,
    pub restarts: usize,
    pub seed: u64,
    pub initial_step: f64,
    pub bounds: Option<Vec<[f64; 2]>>,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = OptimConfig::default();
        Self {
            algorithm: d.algorithm,
            objective: d.objective,
            max_evals: d.max_evals,
            tolerance: d.tolerance,
            restarts: d.restarts,
            seed: d.rng_seed,
            initial_step: d.initial_step,
            bounds: None,
        }
    }
}

impl OptimizerSection {
    pub fn to_config(&self) -> OptimConfig {
        OptimConfig {
            algorithm: self.algorithm,
            objective: self.objective,
            max_evals: self.max_evals,
            tolerance: self.tolerance,
            bounds: self
                .bounds
                .as_ref()
                .map(|b| b.iter().map(|&[lo, hi]| (lo, hi)).collect()),
            restarts: self.restarts,
            rng_seed: self.seed,
            initial_step: self.initial_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastSection {
    pub horizon: usize,
    /// Saved fit to forecast from instead of fitting inline.
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Parameters fitted once on the data before the first origin.
    Fixed,
    /// Parameters refitted at every origin.
    Refit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginKind {
    /// `first_origin`, `first_origin + step`, ...
    Rolling,
    /// Every DIMS block start at or after `first_origin`.
    Dims,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateSection {
    pub first_origin: usize,
    #[serde(default = "default_step")]
    pub step: usize,
    pub horizon: usize,
    #[serde(default = "default_policy")]
    pub policy: PolicyKind,
    #[serde(default = "default_origins")]
    pub origins: OriginKind,
}

fn default_step() -> usize {
    1
}

fn default_policy() -> PolicyKind {
    PolicyKind::Fixed
}

fn default_origins() -> OriginKind {
    OriginKind::Rolling
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeSection {
    /// Loess window across cycles; absent means strictly periodic seasonals.
    pub seasonal_window: Option<usize>,
    pub trend_window: Option<usize>,
    pub max_iterations: Option<usize>,
    pub tolerance: Option<f64>,
}

impl DecomposeSection {
    pub fn to_config(&self) -> LoessConfig {
        let mut cfg = LoessConfig::default();
        if let Some(window) = self.seasonal_window {
            cfg.seasonal = SeasonalSmoother::Loess { window, degree: 1 };
        }
        cfg.trend_window = self.trend_window;
        if let Some(m) = self.max_iterations {
            cfg.max_iterations = m;
        }
        if let Some(t) = self.tolerance {
            cfg.tolerance = t;
        }
        cfg
    }
}

fn default_trend() -> TrendKind {
    TrendKind::Additive
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: PathBuf,
    pub calendar: Option<PathBuf>,
    /// Needed with a calendar when the step does not divide a day.
    pub steps_per_day: Option<usize>,
    /// Output directory; `--out` takes precedence.
    pub out: Option<PathBuf>,
    #[serde(default = "default_trend")]
    pub trend: TrendKind,
    #[serde(default)]
    pub damping: bool,
    #[serde(default)]
    pub ar_adjustment: bool,
    #[serde(default, rename = "season")]
    pub seasons: Vec<SeasonEntry>,
    #[serde(default)]
    pub dims: Vec<DimsEntry>,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    pub forecast: Option<ForecastSection>,
    pub evaluate: Option<EvaluateSection>,
    #[serde(default)]
    pub decompose: DecomposeSection,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl RunConfig {
    /// Parses a config; relative paths are taken from `base`.
    pub fn parse(text: &str, base: &Path) -> CliResult<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| usage(format!("config: {e}")))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.data);
        if let Some(p) = cfg.calendar.as_mut() {
            resolve(p);
        }
        if let Some(p) = cfg.out.as_mut() {
            resolve(p);
        }
        if let Some(p) = cfg.forecast.as_mut().and_then(|f| f.model.as_mut()) {
            resolve(p);
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new("")))
    }

    fn check(&self) -> CliResult<()> {
        if self.seasons.is_empty() {
            return Err(usage("config declares no [[season]]"));
        }
        for s in &self.seasons {
            if s.cycle < 2 {
                return Err(usage(format!(
                    "season `{}`: cycle must be at least 2",
                    s.id
                )));
            }
        }
        for (i, d) in self.dims.iter().enumerate() {
            if self.dims[..i].iter().any(|e| e.group == d.group) {
                return Err(usage(format!("DIMS group `{}` declared twice", d.group)));
            }
        }
        if !self.dims.is_empty() && self.calendar.is_none() {
            return Err(usage("[[dims]] declared without a calendar"));
        }
        if self.forecast.as_ref().is_some_and(|f| f.horizon == 0) {
            return Err(usage("forecast horizon must be positive"));
        }
        if let Some(e) = &self.evaluate {
            if e.horizon == 0 || e.step == 0 {
                return Err(usage("evaluate horizon and step must be positive"));
            }
        }
        Ok(())
    }

    /// Checks declared cycles against the data step. For sub-daily data
    /// every cycle must span whole days or divide a day evenly.
    pub fn check_cycles(&self, step: TimeDelta) -> CliResult<()> {
        let day = TimeDelta::days(1);
        if step >= day || day.num_seconds() % step.num_seconds() != 0 {
            return Ok(());
        }
        for s in &self.seasons {
            let span = (step * s.cycle as i32).num_seconds();
            if span % day.num_seconds() != 0 && day.num_seconds() % span != 0 {
                return Err(usage(format!(
                    "season `{}`: cycle of {} steps ({}s each) is neither whole days nor a fraction of a day",
                    s.id,
                    s.cycle,
                    step.num_seconds()
                )));
            }
        }
        Ok(())
    }

    /// Steps per calendar day: the configured value or one inferred from `step`.
    pub fn steps_per_day(&self, step: TimeDelta) -> CliResult<usize> {
        if let Some(n) = self.steps_per_day {
            return Ok(n);
        }
        let day = TimeDelta::days(1).num_seconds();
        let s = step.num_seconds();
        if s > 0 && s <= day && day % s == 0 {
            Ok((day / s) as usize)
        } else {
            Err(usage(format!(
                "cannot infer steps_per_day from a step of {s}s; set it in the config"
            )))
        }
    }

    pub fn optim_config(&self) -> OptimConfig {
        self.optimizer.to_config()
    }
}
