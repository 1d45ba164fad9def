use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::DecompositionResult;
use crate::error::Result;

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

fn file_name(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_panel(path: &Path, result: &DecompositionResult, values: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "timestamp,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(w, "{},{}", result.timestamp(i).format(TIMESTAMP_FORMAT), v)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes plot-ready CSV panels for a decomposition into `dir`.
///
/// Emits `original.csv`, `trend.csv`, one `seasonal_<id>.csv` per regular
/// seasonality and `remainder.csv` (columns `timestamp,value`), plus per DIMS
/// a `dims_<id>_profile.csv` (`slot,value`) and a `dims_<id>_locations.csv`
/// (`start_timestamp,end_timestamp`, end exclusive). Returns the paths written.
pub fn stlplot_export(result: &DecompositionResult, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let mut panel = |name: String, values: &[f64]| -> Result<()> {
        let path = dir.join(name);
        write_panel(&path, result, values)?;
        written.push(path);
        Ok(())
    };
    panel("original.csv".into(), &result.original)?;
    panel("trend.csv".into(), &result.trend)?;
    for s in &result.seasonals {
        panel(format!("seasonal_{}.csv", file_name(&s.id)), &s.values)?;
    }
    panel("remainder.csv".into(), &result.remainder)?;

    for d in &result.dims {
        let stem = file_name(&d.id);
        let profile_path = dir.join(format!("dims_{stem}_profile.csv"));
        let mut w = BufWriter::new(File::create(&profile_path)?);
        writeln!(w, "slot,value")?;
        for (slot, v) in d.profile.iter().enumerate() {
            writeln!(w, "{slot},{v}")?;
        }
        w.flush()?;
        written.push(profile_path);

        let loc_path = dir.join(format!("dims_{stem}_locations.csv"));
        let mut w = BufWriter::new(File::create(&loc_path)?);
        writeln!(w, "start_timestamp,end_timestamp")?;
        for &start in &d.occurrences {
            writeln!(
                w,
                "{},{}",
                result.timestamp(start).format(TIMESTAMP_FORMAT),
                result.timestamp(start + d.length).format(TIMESTAMP_FORMAT)
            )?;
        }
        w.flush()?;
        written.push(loc_path);
    }
    Ok(written)
}
