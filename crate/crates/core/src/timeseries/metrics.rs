//! Accuracy indicators computed between an actual and a forecast sequence.

use crate::error::{Error, Result};

fn check_lengths(actual: &[f64], forecast: &[f64]) -> Result<()> {
    if actual.len() != forecast.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: forecast.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Root mean squared error.
pub fn rmse(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check_lengths(actual, forecast)?;
    let sse: f64 = actual
        .iter()
        .zip(forecast)
        .map(|(a, f)| (a - f) * (a - f))
        .sum();
    Ok((sse / actual.len() as f64).sqrt())
}

/// Per-point absolute percentage errors, `100 * |a - f| / |a|`.
///
/// Zero actuals are rejected rather than skipped.
pub fn ape(actual: &[f64], forecast: &[f64]) -> Result<Vec<f64>> {
    check_lengths(actual, forecast)?;
    actual
        .iter()
        .zip(forecast)
        .enumerate()
        .map(|(index, (a, f))| {
            if *a == 0.0 {
                Err(Error::ZeroActual { index })
            } else {
                Ok(100.0 * (a - f).abs() / a.abs())
            }
        })
        .collect()
}

/// Mean absolute percentage error, in percent.
pub fn mape(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    let errors = ape(actual, forecast)?;
    Ok(errors.iter().sum::<f64>() / errors.len() as f64)
}

/// Akaike information criterion under Gaussian errors: `n ln(sse/n) + 2k`.
///
/// Only comparable between fits on the same window.
pub fn aic(sse: f64, n: usize, k_params: usize) -> Result<f64> {
    if sse <= 0.0 || !sse.is_finite() {
        return Err(Error::InvalidInput(format!(
            "aic needs positive sse, got {sse}"
        )));
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let n = n as f64;
    Ok(n * (sse / n).ln() + 2.0 * k_params as f64)
}
