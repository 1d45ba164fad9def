//! Generalized multiple-seasonal Holt-Winters engine with DIMS.
//!
//! Two model families share one recursion: an additive damped trend
//! (`L + Σφⁿ·T`) and a multiplicative damped trend (`L·R^Σφⁿ`). Every
//! regular seasonality and every DIMS independently combines additively or
//! multiplicatively; the forecast equation is
//!
//! ```text
//! ŷ(t+k) = [trend term + Σ SA + Σ DA] · Π SM · Π DM + φ_AR^k · ε(t)
//! ```
//!
//! and the level/trend/index updates are the algebraic inversions of it.
//! DIMS indices take part only on steps inside an occurrence block and are
//! neutral everywhere else.

pub(crate) mod engine;
mod forecast;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::{Combination, TimeSeries};

pub use engine::{smooth_pass, FitResult};
pub use forecast::{forecast, DimsProjection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendKind {
    /// Additive trend pinned at zero with `γ = 0`.
    None,
    Additive,
    Multiplicative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeasonComponent {
    pub id: String,
    pub cycle_length: usize,
    pub mode: Combination,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimsComponent {
    pub id: String,
    pub length: usize,
    pub mode: Combination,
}

/// Structure of a model: trend family, optional damping and AR(1)
/// correction, and the combination mode of every component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub trend: TrendKind,
    pub damping: bool,
    pub ar_adjustment: bool,
    pub seasons: Vec<SeasonComponent>,
    pub dims: Vec<DimsComponent>,
}

impl ModelSpec {
    /// Takes the seasonal and DIMS layout from `ts`.
    pub fn new(ts: &TimeSeries, trend: TrendKind, damping: bool, ar_adjustment: bool) -> Self {
        Self {
            trend,
            damping,
            ar_adjustment,
            seasons: ts
                .seasons()
                .iter()
                .map(|s| SeasonComponent {
                    id: s.id.clone(),
                    cycle_length: s.cycle_length,
                    mode: s.mode,
                })
                .collect(),
            dims: ts
                .dims()
                .iter()
                .map(|d| DimsComponent {
                    id: d.spec().id.clone(),
                    length: d.spec().length,
                    mode: d.spec().mode,
                })
                .collect(),
        }
    }

    /// Length of the optimizer's parameter vector:
    /// α, γ, one δ per season, one δ_D per DIMS, then φ and φ_AR when enabled.
    pub fn param_count(&self) -> usize {
        2 + self.seasons.len()
            + self.dims.len()
            + usize::from(self.damping)
            + usize::from(self.ar_adjustment)
    }

    pub fn has_multiplicative(&self) -> bool {
        self.trend == TrendKind::Multiplicative
            || self
                .seasons
                .iter()
                .any(|s| s.mode == Combination::Multiplicative)
            || self
                .dims
                .iter()
                .any(|d| d.mode == Combination::Multiplicative)
    }

    pub fn max_cycle(&self) -> usize {
        self.seasons
            .iter()
            .map(|s| s.cycle_length)
            .max()
            .unwrap_or(0)
    }

    /// Steps excluded from the fit objective: one cycle of the longest seasonality.
    pub fn warmup(&self) -> usize {
        self.max_cycle()
    }

    /// Checks that `ts` carries exactly the components this spec expects.
    pub fn check_series(&self, ts: &TimeSeries) -> Result<()> {
        let layout = ModelSpec::new(ts, self.trend, self.damping, self.ar_adjustment);
        if layout.seasons != self.seasons || layout.dims != self.dims {
            return Err(Error::InvalidInput(
                "series seasons/DIMS do not match the model spec".into(),
            ));
        }
        Ok(())
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        reduce_check(self)
    }
}

/// Published special case a [`ModelSpec`] corresponds to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanonicalForm {
    NonSeasonal,
    ClassicHoltWinters(Combination),
    TaylorDoubleSeasonal { ar_adjusted: bool },
    MultipleSeasonal { seasons: usize },
    MultipleSeasonalDims { seasons: usize, dims: usize },
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonicalForm::NonSeasonal => write!(f, "non-seasonal exponential smoothing"),
            CanonicalForm::ClassicHoltWinters(Combination::Multiplicative) => {
                write!(f, "classic multiplicative Holt-Winters")
            }
            CanonicalForm::ClassicHoltWinters(Combination::Additive) => {
                write!(f, "classic additive Holt-Winters")
            }
            CanonicalForm::TaylorDoubleSeasonal { ar_adjusted: true } => {
                write!(f, "Taylor double-seasonal with AR adjustment")
            }
            CanonicalForm::TaylorDoubleSeasonal { ar_adjusted: false } => {
                write!(f, "Taylor double-seasonal")
            }
            CanonicalForm::MultipleSeasonal { seasons } => {
                write!(f, "nHWT with {seasons} seasonalities")
            }
            CanonicalForm::MultipleSeasonalDims { seasons, dims } => {
                write!(f, "nHWT-DIMS with {seasons} seasonalities and {dims} DIMS")
            }
        }
    }
}

/// Classifies a spec against the special cases the generalized model subsumes.
pub fn reduce_check(spec: &ModelSpec) -> CanonicalForm {
    let n = spec.seasons.len();
    if !spec.dims.is_empty() {
        return CanonicalForm::MultipleSeasonalDims {
            seasons: n,
            dims: spec.dims.len(),
        };
    }
    let additive_trend = spec.trend != TrendKind::Multiplicative;
    let all_mult = spec
        .seasons
        .iter()
        .all(|s| s.mode == Combination::Multiplicative);
    match n {
        0 => CanonicalForm::NonSeasonal,
        1 if additive_trend && !spec.damping && !spec.ar_adjustment => {
            CanonicalForm::ClassicHoltWinters(spec.seasons[0].mode)
        }
        2 if additive_trend && all_mult && !spec.damping => CanonicalForm::TaylorDoubleSeasonal {
            ar_adjusted: spec.ar_adjustment,
        },
        _ => CanonicalForm::MultipleSeasonal { seasons: n },
    }
}

/// Smoothing parameters. α, γ, every δ and φ lie in `[0, 1]`; φ_AR in `(-1, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingParams {
    pub alpha: f64,
    pub gamma: f64,
    pub deltas: Vec<f64>,
    pub deltas_dims: Vec<f64>,
    pub phi: f64,
    pub ar1: f64,
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::ParameterOutOfBounds {
            name,
            value,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

impl SmoothingParams {
    pub fn new(
        alpha: f64,
        gamma: f64,
        deltas: Vec<f64>,
        deltas_dims: Vec<f64>,
        phi: f64,
        ar1: f64,
    ) -> Result<Self> {
        let p = Self {
            alpha,
            gamma,
            deltas,
            deltas_dims,
            phi,
            ar1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("alpha", self.alpha)?;
        check_unit("gamma", self.gamma)?;
        for &d in &self.deltas {
            check_unit("delta", d)?;
        }
        for &d in &self.deltas_dims {
            check_unit("delta_dims", d)?;
        }
        check_unit("phi", self.phi)?;
        if !(self.ar1 > -1.0 && self.ar1 < 1.0) {
            return Err(Error::ParameterOutOfBounds {
                name: "ar1",
                value: self.ar1,
                lo: -1.0,
                hi: 1.0,
            });
        }
        Ok(())
    }

    /// Starting point for the optimizer: 0.1 everywhere, φ = 0.95 when
    /// damping is enabled, φ_AR = 0.
    pub fn initial(spec: &ModelSpec) -> Self {
        Self {
            alpha: 0.1,
            gamma: 0.1,
            deltas: vec![0.1; spec.seasons.len()],
            deltas_dims: vec![0.1; spec.dims.len()],
            phi: if spec.damping { 0.95 } else { 1.0 },
            ar1: 0.0,
        }
    }

    /// Checks component counts against `spec`.
    pub fn check_spec(&self, spec: &ModelSpec) -> Result<()> {
        if self.deltas.len() != spec.seasons.len() {
            return Err(Error::LengthMismatch {
                left: spec.seasons.len(),
                right: self.deltas.len(),
            });
        }
        if self.deltas_dims.len() != spec.dims.len() {
            return Err(Error::LengthMismatch {
                left: spec.dims.len(),
                right: self.deltas_dims.len(),
            });
        }
        Ok(())
    }

    /// Applies the values `spec` forces: γ = 0 without trend, φ = 1 without
    /// damping, φ_AR = 0 without AR adjustment.
    pub fn resolved(&self, spec: &ModelSpec) -> Self {
        let mut p = self.clone();
        if spec.trend == TrendKind::None {
            p.gamma = 0.0;
        }
        if !spec.damping {
            p.phi = 1.0;
        }
        if !spec.ar_adjustment {
            p.ar1 = 0.0;
        }
        p
    }

    /// Flattens into the optimizer layout described by [`ModelSpec::param_count`].
    pub fn to_vector(&self, spec: &ModelSpec) -> Vec<f64> {
        let mut v = Vec::with_capacity(spec.param_count());
        v.push(self.alpha);
        v.push(self.gamma);
        v.extend_from_slice(&self.deltas);
        v.extend_from_slice(&self.deltas_dims);
        if spec.damping {
            v.push(self.phi);
        }
        if spec.ar_adjustment {
            v.push(self.ar1);
        }
        v
    }

    /// Inverse of [`to_vector`](Self::to_vector); does not check bounds.
    pub fn from_vector(spec: &ModelSpec, x: &[f64]) -> Result<Self> {
        if x.len() != spec.param_count() {
            return Err(Error::LengthMismatch {
                left: spec.param_count(),
                right: x.len(),
            });
        }
        let ns = spec.seasons.len();
        let nd = spec.dims.len();
        let mut i = 2 + ns + nd;
        let phi = if spec.damping {
            i += 1;
            x[i - 1]
        } else {
            1.0
        };
        let ar1 = if spec.ar_adjustment { x[i] } else { 0.0 };
        Ok(Self {
            alpha: x[0],
            gamma: x[1],
            deltas: x[2..2 + ns].to_vec(),
            deltas_dims: x[2 + ns..2 + ns + nd].to_vec(),
            phi,
            ar1,
        })
    }
}

/// Evolving model state. Regular index rings are addressed by absolute time
/// modulo the cycle length; DIMS arrays by offset inside the block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub level: f64,
    /// Additive trend `T`, or multiplicative growth rate `R` under a
    /// multiplicative-trend model.
    pub trend: f64,
    /// One ring of `cycle_length` indices per regular seasonality.
    pub seasonal: Vec<Vec<f64>>,
    /// One array of `length` indices per DIMS.
    pub dims: Vec<Vec<f64>>,
    /// Last one-step residual of the base forecast.
    pub last_residual: f64,
    /// Absolute index of the next observation the state will absorb.
    pub next_step: usize,
}

impl ModelState {
    /// State with every index at its neutral element.
    pub fn neutral(spec: &ModelSpec, level: f64) -> Self {
        Self {
            level,
            trend: if spec.trend == TrendKind::Multiplicative {
                1.0
            } else {
                0.0
            },
            seasonal: spec
                .seasons
                .iter()
                .map(|s| vec![s.mode.neutral(); s.cycle_length])
                .collect(),
            dims: spec
                .dims
                .iter()
                .map(|d| vec![d.mode.neutral(); d.length])
                .collect(),
            last_residual: 0.0,
            next_step: 0,
        }
    }

    pub fn check_spec(&self, spec: &ModelSpec) -> Result<()> {
        let seasons_ok = self.seasonal.len() == spec.seasons.len()
            && self
                .seasonal
                .iter()
                .zip(&spec.seasons)
                .all(|(ring, s)| ring.len() == s.cycle_length);
        let dims_ok = self.dims.len() == spec.dims.len()
            && self
                .dims
                .iter()
                .zip(&spec.dims)
                .all(|(slots, d)| slots.len() == d.length);
        if !seasons_ok || !dims_ok {
            return Err(Error::InvalidInput(
                "state dimensions do not match the model spec".into(),
            ));
        }
        let values = std::iter::once(self.level)
            .chain(std::iter::once(self.trend))
            .chain(self.seasonal.iter().flatten().copied())
            .chain(self.dims.iter().flatten().copied())
            .chain(std::iter::once(self.last_residual));
        if values.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("state holds non-finite values".into()));
        }
        Ok(())
    }
}
