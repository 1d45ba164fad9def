//! CSV loading into a gap-free series.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime, TimeDelta};
use hwdims::TimeSeries;

use crate::error::{CliError, CliResult};

const FORMATS: [&str; 4] = [
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M",
];

/// Parses an ISO-8601 timestamp without offset; a bare date means midnight.
pub fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    let s = raw.trim().trim_end_matches('Z');
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .or_else(|| {
            NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .ok()
                .and_then(|d| d.and_hms_opt(0, 0, 0))
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub series: TimeSeries,
    /// Timestamps filled by linear interpolation.
    pub interpolated: Vec<NaiveDateTime>,
    /// Timestamps that appeared more than once and were averaged.
    pub merged_duplicates: Vec<NaiveDateTime>,
}

struct Row {
    at: NaiveDateTime,
    values: Vec<f64>,
    count: usize,
}

fn data_error(msg: String) -> CliError {
    CliError::Data(msg)
}

/// Reads `timestamp,value[,covariate...]`.
///
/// Repeated timestamps (clock set back) are averaged; a single missing
/// step is linearly interpolated; longer gaps and decreasing timestamps
/// are rejected. The nominal step is the most frequent spacing.
pub fn ingest(path: &Path) -> CliResult<Ingested> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| data_error(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| data_error(format!("{}: {e}", path.display())))?
        .clone();
    if headers.len() < 2 || &headers[0] != "timestamp" || &headers[1] != "value" {
        return Err(data_error(format!(
            "{}: header must start with `timestamp,value`",
            path.display()
        )));
    }
    let columns: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();

    let mut rows: Vec<Row> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| data_error(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |what: &str| data_error(format!("{}: row {line}: {what}", path.display()));
        if record.len() != headers.len() {
            return Err(bad("wrong number of fields"));
        }
        let at = parse_timestamp(&record[0])
            .ok_or_else(|| bad(&format!("unparseable timestamp `{}`", &record[0])))?;
        let values = record
            .iter()
            .skip(1)
            .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| bad("unparseable number"))?;
        match rows.last_mut() {
            Some(prev) if prev.at == at => {
                for (acc, v) in prev.values.iter_mut().zip(values) {
                    *acc += v;
                }
                prev.count += 1;
            }
            Some(prev) if prev.at > at => {
                return Err(bad(&format!("timestamp {at} goes back before {}", prev.at)));
            }
            _ => rows.push(Row {
                at,
                values,
                count: 1,
            }),
        }
    }
    if rows.len() < 2 {
        return Err(data_error(format!(
            "{}: need at least two observations",
            path.display()
        )));
    }
    let mut merged_duplicates = Vec::new();
    for row in &mut rows {
        if row.count > 1 {
            row.values.iter_mut().for_each(|v| *v /= row.count as f64);
            merged_duplicates.push(row.at);
            log::warn!("averaged {} rows at {}", row.count, row.at);
        }
    }

    let step = nominal_step(&rows);
    let mut filled: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    let mut interpolated = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if i > 0 {
            let prev = &rows[i - 1];
            let gap = row.at - prev.at;
            if gap == step * 2 {
                let mid = prev.at + step;
                filled.push(
                    prev.values
                        .iter()
                        .zip(&row.values)
                        .map(|(a, b)| 0.5 * (a + b))
                        .collect(),
                );
                interpolated.push(mid);
                log::warn!("interpolated missing step at {mid}");
            } else if gap != step {
                return Err(data_error(format!(
                    "{}: gap between {} and {} is not one step of {}s",
                    path.display(),
                    prev.at,
                    row.at,
                    step.num_seconds()
                )));
            }
        }
        filled.push(row.values.clone());
    }

    let values: Vec<f64> = filled.iter().map(|r| r[0]).collect();
    let mut series = TimeSeries::new(rows[0].at, step, values)?;
    for (k, name) in columns.iter().enumerate().skip(1) {
        series.add_covariate(name.clone(), filled.iter().map(|r| r[k]).collect())?;
    }
    if !interpolated.is_empty() {
        log::warn!("{} missing step(s) interpolated", interpolated.len());
    }
    Ok(Ingested {
        series,
        interpolated,
        merged_duplicates,
    })
}

fn nominal_step(rows: &[Row]) -> TimeDelta {
    let mut counts: BTreeMap<TimeDelta, usize> = BTreeMap::new();
    for w in rows.windows(2) {
        *counts.entry(w[1].at - w[0].at).or_default() += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    counts
        .into_iter()
        .find(|&(_, c)| c == best)
        .map(|(d, _)| d)
        .expect("at least one spacing")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn hourly_rows(n: usize) -> String {
        let mut s = String::from("timestamp,value\n");
        for h in 0..n {
            s.push_str(&format!(
                "2024-01-{:02}T{:02}:00:00,{}\n",
                1 + h / 24,
                h % 24,
                100 + h
            ));
        }
        s
    }

    #[test]
    fn clean_rows() {
        let f = write(&hourly_rows(48));
        let r = ingest(f.path()).unwrap();
        assert_eq!(r.series.len(), 48);
        assert_eq!(r.series.step(), TimeDelta::hours(1));
        assert!(r.interpolated.is_empty());
    }

    #[test]
    fn single_gap_interpolated() {
        let f = write("timestamp,value\n2024-01-01T00:00:00,98\n2024-01-01T01:00:00,100\n2024-01-01T03:00:00,104\n2024-01-01T04:00:00,105\n");
        let r = ingest(f.path()).unwrap();
        assert_eq!(r.series.values(), &[98.0, 100.0, 102.0, 104.0, 105.0]);
        assert_eq!(
            r.interpolated,
            vec![parse_timestamp("2024-01-01T02:00:00").unwrap()]
        );
    }

    #[test]
    fn double_gap_rejected() {
        let f = write("timestamp,value\n2024-01-01T00:00:00,1\n2024-01-01T01:00:00,1\n2024-01-01T04:00:00,1\n2024-01-01T05:00:00,1\n");
        let err = ingest(f.path()).unwrap_err().to_string();
        assert!(
            err.contains("2024-01-01 01:00:00") && err.contains("2024-01-01 04:00:00"),
            "{err}"
        );
    }

    #[test]
    fn duplicates_averaged() {
        let f = write("timestamp,value\n2024-10-27 01:00,10\n2024-10-27 02:00,20\n2024-10-27 02:00,30\n2024-10-27 03:00,40\n");
        let r = ingest(f.path()).unwrap();
        assert_eq!(r.series.values(), &[10.0, 25.0, 40.0]);
        assert_eq!(r.merged_duplicates.len(), 1);
    }

    #[test]
    fn bad_rows_report_line() {
        let f = write("timestamp,value\n2024-01-01T00:00:00,1\n2024-01-01T01:00:00,abc\n");
        let err = ingest(f.path()).unwrap_err().to_string();
        assert!(err.contains("row 3"), "{err}");
        let f = write("timestamp,value\n2024-01-01T00:00:00,1\nyesterday,2\n");
        assert!(ingest(f.path()).unwrap_err().to_string().contains("row 3"));
        let f = write("timestamp,value\n2024-01-01T02:00:00,1\n2024-01-01T01:00:00,2\n");
        assert!(ingest(f.path()).is_err());
        let f = write("time,load\n2024-01-01T02:00:00,1\n");
        assert!(ingest(f.path()).is_err());
    }

    #[test]
    fn covariates_kept() {
        let f = write("timestamp,value,temp\n2024-01-01,1,5\n2024-01-02,2,6\n2024-01-04,4,8\n");
        let r = ingest(f.path()).unwrap();
        assert_eq!(r.series.step(), TimeDelta::days(1));
        assert_eq!(r.series.covariate("temp").unwrap(), &[5.0, 6.0, 7.0, 8.0]);
    }
}
