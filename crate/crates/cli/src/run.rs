//! Command dispatch.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hwdims::calendar::{build_dims_with, future_occurrences, CalendarEvent, CalendarWarning};
use hwdims::decompose::{mstl, stlplot_export};
use hwdims::evaluate::{
    accuracy, mforecast_at, rolling_origins, AccuracyReport, ForecastGrid, ParamsPolicy,
};
use hwdims::optimize::{find_params, init_values, OptimConfig};
use hwdims::timeseries::metrics;
use hwdims::{
    forecast, DimsProjection, FitResult, ModelSpec, ModelState, SeasonSpec, SmoothingParams,
    TimeSeries,
};
use serde::Serialize;

use crate::artifact::ModelArtifact;
use crate::config::{OriginKind, PolicyKind, RunConfig};
use crate::error::{CliError, CliResult};
use crate::ingest::ingest;

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

#[derive(Debug, Parser)]
#[command(
    name = "hwdims",
    version,
    about = "Multiple-seasonal Holt-Winters forecasting with DIMS"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Optimizer seed (overrides `[optimizer] seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, short, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Fit the model; writes model.json and accuracy.json.
    Fit,
    /// Forecast past the end of the data; writes forecast.csv.
    Forecast,
    /// Loess decomposition; writes one CSV per panel.
    Decompose,
    /// Rolling-origin evaluation; writes grid.csv and summary.json.
    Evaluate,
}

/// Data with seasons and calendar DIMS attached, ready for any command.
#[derive(Debug, Clone)]
pub struct Workload {
    pub config: RunConfig,
    pub series: TimeSeries,
    pub events: Vec<CalendarEvent>,
    pub steps_per_day: Option<usize>,
    pub calendar_warnings: Vec<CalendarWarning>,
    pub interpolated: usize,
    pub merged_duplicates: usize,
}

fn read_calendar(path: &Path) -> CliResult<Vec<CalendarEvent>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut events = Vec::new();
    for record in reader.deserialize::<CalendarEvent>() {
        events.push(record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?);
    }
    Ok(events)
}

impl Workload {
    pub fn prepare(config: RunConfig) -> CliResult<Self> {
        let ingested = ingest(&config.data)?;
        let mut series = ingested.series;
        config.check_cycles(series.step())?;
        for s in &config.seasons {
            let mut spec = SeasonSpec::new(s.id.clone(), s.cycle, s.mode);
            if let Some(init) = s.init {
                spec = spec.with_init(init);
            }
            series
                .add_season(spec)
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }

        let mut events = Vec::new();
        let mut steps_per_day = None;
        let mut calendar_warnings = Vec::new();
        if let Some(path) = &config.calendar {
            let spd = config.steps_per_day(series.step())?;
            events = read_calendar(path)?;
            events.retain(|e| config.dims.iter().any(|d| d.group == e.group));
            for d in &config.dims {
                if !events.iter().any(|e| e.group == d.group) {
                    return Err(CliError::Usage(format!(
                        "calendar has no events for DIMS group `{}`",
                        d.group
                    )));
                }
            }
            let built = build_dims_with(&series, &events, spd, |group| {
                let d = config
                    .dims
                    .iter()
                    .find(|d| d.group == group)
                    .expect("filtered to declared groups");
                (d.mode, d.init)
            })?;
            for spec in built.specs {
                series.add_dims(spec)?;
            }
            calendar_warnings = built.warnings;
            steps_per_day = Some(spd);
        }
        Ok(Self {
            config,
            series,
            events,
            steps_per_day,
            calendar_warnings,
            interpolated: ingested.interpolated.len(),
            merged_duplicates: ingested.merged_duplicates.len(),
        })
    }

    pub fn spec(&self) -> ModelSpec {
        ModelSpec::new(
            &self.series,
            self.config.trend,
            self.config.damping,
            self.config.ar_adjustment,
        )
    }

    /// Seeds from the data and a parameter search on the whole series.
    pub fn fit(&self, optim: &OptimConfig) -> CliResult<(ModelSpec, SmoothingParams, FitResult)> {
        let spec = self.spec();
        let seeds = init_values(&self.series, &spec)?;
        let (params, fit) = find_params(&self.series, &spec, optim, &seeds)?;
        Ok((spec, params, fit))
    }

    /// Forecasts `horizon` steps past the data from `state`, projecting
    /// DIMS blocks that run past the end from the calendar.
    pub fn forecast_from(
        &self,
        spec: &ModelSpec,
        params: &SmoothingParams,
        state: &ModelState,
        horizon: usize,
    ) -> CliResult<Vec<f64>> {
        let n = self.series.len();
        let extra = match self.steps_per_day {
            Some(spd) => future_occurrences(&self.series, &self.events, spd, n + horizon)?,
            None => BTreeMap::new(),
        };
        let projection = DimsProjection::with_future(&self.series, n, horizon, &extra)?;
        Ok(forecast(state, spec, params, horizon, &projection)?)
    }
}

#[derive(Serialize)]
struct FitSummary<'a> {
    canonical_form: String,
    #[serde(flatten)]
    accuracy: &'a AccuracyReport,
    interpolated_steps: usize,
    merged_duplicates: usize,
    dropped_calendar_events: Vec<String>,
}

#[derive(Serialize)]
struct OriginMape {
    origin_timestamp: String,
    mape: f64,
}

#[derive(Serialize)]
struct EvaluateSummary {
    origins: usize,
    horizon: usize,
    grand_mape: f64,
    per_origin: Vec<OriginMape>,
    per_horizon_mape: Vec<f64>,
    /// MAPE over forecasts whose target step lies inside a block of each DIMS.
    special_day_mape: BTreeMap<String, Option<f64>>,
    params: Vec<SmoothingParams>,
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Per-DIMS MAPE over grid cells whose target step is inside a block.
pub fn special_day_mape(ts: &TimeSeries, grid: &ForecastGrid) -> BTreeMap<String, Option<f64>> {
    let mut out = BTreeMap::new();
    for dims in ts.dims() {
        let (mut actual, mut predicted) = (Vec::new(), Vec::new());
        for (i, &o) in grid.origins.iter().enumerate() {
            for k in 0..grid.horizon {
                if dims.recurrence().is_active(o + k) {
                    actual.push(grid.actuals[i][k]);
                    predicted.push(grid.forecasts[i][k]);
                }
            }
        }
        out.insert(
            dims.spec().id.clone(),
            metrics::mape(&actual, &predicted).ok(),
        );
    }
    out
}

fn run_fit(work: &Workload, out: &Path) -> CliResult<Vec<PathBuf>> {
    let (spec, params, fit) = work.fit(&work.config.optim_config())?;
    let artifact = ModelArtifact::new(spec.clone(), params, fit.final_state.clone(), &work.series);
    let model_path = out.join("model.json");
    fs::write(&model_path, artifact.to_json() + "\n")?;

    let report = accuracy(&fit);
    let summary = FitSummary {
        canonical_form: spec.canonical_form().to_string(),
        accuracy: &report,
        interpolated_steps: work.interpolated,
        merged_duplicates: work.merged_duplicates,
        dropped_calendar_events: work
            .calendar_warnings
            .iter()
            .map(|w| {
                format!(
                    "{} ({}): {:?}",
                    w.event.event_id, w.event.date_start, w.reason
                )
            })
            .collect(),
    };
    let accuracy_path = out.join("accuracy.json");
    write_json(&accuracy_path, &summary)?;
    log::info!("fit {}: rmse {}", summary.canonical_form, report.rmse);
    Ok(vec![model_path, accuracy_path])
}

fn run_forecast(work: &Workload, out: &Path) -> CliResult<Vec<PathBuf>> {
    let section = work
        .config
        .forecast
        .as_ref()
        .ok_or_else(|| CliError::Usage("forecast needs a [forecast] section".into()))?;
    let (spec, params, state) = match &section.model {
        Some(path) => {
            let artifact = ModelArtifact::load(path)?;
            artifact.check_matches(&work.series, &work.spec())?;
            (artifact.spec, artifact.params, artifact.state)
        }
        None => {
            let (spec, params, fit) = work.fit(&work.config.optim_config())?;
            (spec, params, fit.final_state)
        }
    };
    let values = work.forecast_from(&spec, &params, &state, section.horizon)?;
    let path = out.join("forecast.csv");
    let mut w = csv::Writer::from_writer(BufWriter::new(fs::File::create(&path)?));
    let n = work.series.len();
    let io = |e: csv::Error| CliError::Data(e.to_string());
    w.write_record(["timestamp", "forecast"]).map_err(io)?;
    for (k, v) in values.iter().enumerate() {
        let at = work
            .series
            .timestamp(n + k)
            .format(TIMESTAMP_FORMAT)
            .to_string();
        w.write_record([at, v.to_string()]).map_err(io)?;
    }
    w.flush()?;
    Ok(vec![path])
}

fn run_decompose(work: &Workload, out: &Path) -> CliResult<Vec<PathBuf>> {
    let result = mstl(&work.series, &work.config.decompose.to_config())?;
    if !result.converged {
        log::warn!(
            "decomposition stopped after {} iterations without converging",
            result.iterations
        );
    }
    Ok(stlplot_export(&result, out)?)
}

fn evaluation_origins(
    work: &Workload,
    first: usize,
    step: usize,
    horizon: usize,
    kind: OriginKind,
) -> Vec<usize> {
    let n = work.series.len();
    match kind {
        OriginKind::Rolling => rolling_origins(n, first, step, horizon),
        OriginKind::Dims => {
            let mut origins: Vec<usize> = work
                .series
                .dims()
                .iter()
                .flat_map(|d| d.spec().occurrences.iter().copied())
                .filter(|&o| o >= first && o + horizon <= n)
                .collect();
            origins.sort_unstable();
            origins.dedup();
            origins
        }
    }
}

fn run_evaluate(work: &Workload, out: &Path) -> CliResult<Vec<PathBuf>> {
    let section = work
        .config
        .evaluate
        .as_ref()
        .ok_or_else(|| CliError::Usage("evaluate needs an [evaluate] section".into()))?;
    let origins = evaluation_origins(
        work,
        section.first_origin,
        section.step,
        section.horizon,
        section.origins,
    );
    let Some(&first) = origins.first() else {
        return Err(CliError::Usage(format!(
            "no origin at or after {} leaves {} steps before the end of {} observations",
            section.first_origin,
            section.horizon,
            work.series.len()
        )));
    };
    let spec = work.spec();
    let optim = work.config.optim_config();
    let policy = match section.policy {
        PolicyKind::Fixed => {
            let head = work.series.head(first)?;
            let seeds = init_values(&head, &spec)?;
            let (params, _) = find_params(&head, &spec, &optim, &seeds)?;
            ParamsPolicy::Fixed(params)
        }
        PolicyKind::Refit => ParamsPolicy::RefitPerOrigin(optim),
    };
    let grid = mforecast_at(&work.series, &spec, &policy, &origins, section.horizon)?;

    let grid_path = out.join("grid.csv");
    let mut w = BufWriter::new(fs::File::create(&grid_path)?);
    grid.write_csv(&mut w)?;
    drop(w);

    let summary = EvaluateSummary {
        origins: grid.origins.len(),
        horizon: grid.horizon,
        grand_mape: grid.grand_mape(),
        per_origin: grid
            .origin_timestamps
            .iter()
            .zip(&grid.per_origin_mape)
            .map(|(t, &mape)| OriginMape {
                origin_timestamp: t.format(TIMESTAMP_FORMAT).to_string(),
                mape,
            })
            .collect(),
        per_horizon_mape: grid.per_horizon_mape.clone(),
        special_day_mape: special_day_mape(&work.series, &grid),
        params: grid.params.clone(),
    };
    let summary_path = out.join("summary.json");
    write_json(&summary_path, &summary)?;
    log::info!(
        "evaluated {} origins: MAPE {}",
        summary.origins,
        summary.grand_mape
    );
    Ok(vec![grid_path, summary_path])
}

/// Runs one parsed command; returns the files written.
pub fn execute(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let mut config = RunConfig::load(config_path)?;
    if let Some(seed) = cli.seed {
        config.optimizer.seed = seed;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out)?;
    let work = Workload::prepare(config)?;
    match cli.command {
        Command::Fit => run_fit(&work, &out),
        Command::Forecast => run_forecast(&work, &out),
        Command::Decompose => run_decompose(&work, &out),
        Command::Evaluate => run_evaluate(&work, &out),
    }
}

/// Full program: argument parsing, logging, dispatch, diagnostics on stderr.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.to_string().trim_end().to_string());
            eprintln!("{}", err.diagnostic());
            return err.into_exit();
        }
    };
    let level = if cli.verbose {
        log::LevelFilter::Info
    } else {
        log::LevelFilter::Warn
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                log::info!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.diagnostic());
            err.into_exit()
        }
    }
}
