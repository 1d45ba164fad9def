//! Fixture generators and oracles shared by the CLI test targets.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{NaiveDate, NaiveDateTime, TimeDelta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const ALPHA: f64 = 0.2;
pub const GAMMA: f64 = 0.05;
pub const DELTA_DAY: f64 = 0.3;
pub const DELTA_WEEK: f64 = 0.2;

pub fn start() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2024, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap()
}

/// Simulates `n` hourly steps of the double-seasonal multiplicative process
/// y = (L + T)·D·W + e,  L' = α y/(D W) + (1-α)(L+T),  T' = γ(L'-L) + (1-γ)T,
/// D' = δd y/(L' W) + (1-δd) D,  W' = δw y/(L' D) + (1-δw) W.
pub fn taylor_process(n: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut day: Vec<f64> = (0..24)
        .map(|h| 1.0 + 0.25 * (2.0 * PI * (h as f64 - 6.0) / 24.0).sin())
        .collect();
    let mut week: Vec<f64> = (0..168)
        .map(|h| if h / 24 >= 5 { 0.8 } else { 1.08 })
        .collect();
    let wmean = week.iter().sum::<f64>() / 168.0;
    week.iter_mut().for_each(|w| *w /= wmean);
    let (mut level, mut trend) = (1000.0, 0.0);
    let mut y = Vec::with_capacity(n);
    for t in 0..n {
        let (d, w) = (day[t % 24], week[t % 168]);
        let obs = (level + trend) * d * w + noise.sample(&mut rng);
        let new_level = ALPHA * obs / (d * w) + (1.0 - ALPHA) * (level + trend);
        trend = GAMMA * (new_level - level) + (1.0 - GAMMA) * trend;
        day[t % 24] = DELTA_DAY * obs / (new_level * w) + (1.0 - DELTA_DAY) * d;
        week[t % 168] = DELTA_WEEK * obs / (new_level * d) + (1.0 - DELTA_WEEK) * w;
        level = new_level;
        y.push(obs);
    }
    y
}

/// Ten holiday days per year, at least a week apart, in day units.
fn holiday_days(rng: &mut ChaCha8Rng, years: usize) -> Vec<usize> {
    let mut days = Vec::new();
    for year in 0..years {
        let mut picked: Vec<usize> = Vec::new();
        while picked.len() < 10 {
            let d = year * 365 + rng.random_range(14..351);
            if picked.iter().all(|&p| p.abs_diff(d) > 7) {
                picked.push(d);
            }
        }
        picked.sort_unstable();
        days.extend(picked);
    }
    days
}

/// Hourly load with daily and weekly shapes, a random-walk level and every
/// holiday scaled by 0.85. Returns the values and the holiday block starts.
pub fn holiday_load(days: usize, seed: u64) -> (Vec<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hol = holiday_days(&mut rng, days.div_ceil(365));
    let walk = Normal::new(0.0, 0.3).unwrap();
    let noise = Normal::new(0.0, 8.0).unwrap();
    let mut level = 1000.0;
    let mut y = Vec::with_capacity(days * 24);
    for t in 0..days * 24 {
        level += walk.sample(&mut rng);
        let h = t % 24;
        let d = 1.0 + 0.25 * (2.0 * PI * (h as f64 - 6.0) / 24.0).sin();
        let w = if (t / 24) % 7 >= 5 { 0.85 } else { 1.05 };
        let factor = if hol.contains(&(t / 24)) { 0.85 } else { 1.0 };
        y.push(level * d * w * factor + noise.sample(&mut rng));
    }
    let starts = hol.iter().filter(|&&d| d < days).map(|d| d * 24).collect();
    (y, starts)
}

/// Multiplicative Holt-Winters written out directly:
/// L_t = α y_t / S_{t-s} + (1-α)(L_{t-1} + T_{t-1})
/// T_t = γ (L_t - L_{t-1}) + (1-γ) T_{t-1}
/// S_t = δ y_t / L_t + (1-δ) S_{t-s}
/// with one-step forecast (L_{t-1} + T_{t-1}) S_{t-s} and
/// k-step forecast (L_n + k T_n) S_{n-s+k}.
pub fn classic_oracle(
    y: &[f64],
    s: usize,
    (alpha, gamma, delta): (f64, f64, f64),
    (l0, t0, s0): (f64, f64, &[f64]),
    horizon: usize,
) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let mut seasonal = vec![0.0; n + s];
    seasonal[..s].copy_from_slice(s0);
    let (mut l, mut tr) = (l0, t0);
    let mut fitted = Vec::with_capacity(n);
    for t in 0..n {
        let idx = seasonal[t];
        fitted.push((l + tr) * idx);
        let l_new = alpha * y[t] / idx + (1.0 - alpha) * (l + tr);
        tr = gamma * (l_new - l) + (1.0 - gamma) * tr;
        seasonal[t + s] = delta * y[t] / l_new + (1.0 - delta) * idx;
        l = l_new;
    }
    let fc = (1..=horizon)
        .map(|k| (l + k as f64 * tr) * seasonal[n + (k - 1) % s])
        .collect();
    (fitted, fc)
}

pub fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Writes `timestamp,value` rows at `step` from 2024-01-01.
pub fn write_series(path: &Path, values: &[f64], step: TimeDelta) {
    let mut s = String::from("timestamp,value\n");
    for (i, v) in values.iter().enumerate() {
        let at = start() + step * i as i32;
        writeln!(s, "{},{v}", at.format("%Y-%m-%dT%H:%M:%S")).unwrap();
    }
    std::fs::write(path, s).unwrap();
}

/// Writes one-day events of `group` starting at the given hour offsets from 2024-01-01.
pub fn write_calendar(path: &Path, group: &str, block_starts: &[usize]) {
    let mut s = String::from("event_id,group,date_start,span_days\n");
    for (i, &h) in block_starts.iter().enumerate() {
        let date = (start() + TimeDelta::hours(h as i64)).date();
        writeln!(s, "{group}-{i},{group},{date},1").unwrap();
    }
    std::fs::write(path, s).unwrap();
}

pub fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

pub fn hwdims(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hwdims"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Runs `hwdims <command> --config <config> --out <out>`.
pub fn run_command(command: &str, config: &Path, out: &Path) -> Output {
    hwdims(&[
        command,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
}

/// Numeric column `column` of a CSV with a header row.
pub fn csv_column(path: &Path, column: usize) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(column).unwrap().parse().unwrap())
        .collect()
}
