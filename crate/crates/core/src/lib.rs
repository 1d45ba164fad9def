//! Multiple-seasonal Holt-Winters forecasting with discrete-interval moving
//! seasonalities (DIMS): irregularly recurring blocks such as holidays that
//! carry their own seasonal profile.

pub mod calendar;
pub mod decompose;
pub mod error;
pub mod evaluate;
pub mod hw;
pub mod optimize;
pub mod timeseries;

pub use error::{Error, Result};
pub use hw::{
    forecast, smooth_pass, DimsProjection, FitResult, ModelSpec, ModelState, SmoothingParams,
    TrendKind,
};
pub use optimize::{find_params, init_values, OptimConfig};
pub use timeseries::{Combination, DimsSpec, SeasonSpec, TimeSeries};
