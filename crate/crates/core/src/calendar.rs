//! Event calendars to DIMS occurrence lists.

use std::collections::BTreeMap;

use chrono::{NaiveDate, TimeDelta};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::{Combination, DimsInit, DimsSpec, TimeSeries};

/// One dated special period. Events sharing a `group` form one DIMS.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalendarEvent {
    pub event_id: String,
    pub group: String,
    pub date_start: NaiveDate,
    pub span_days: u32,
}

impl CalendarEvent {
    pub fn new(
        event_id: impl Into<String>,
        group: impl Into<String>,
        date_start: NaiveDate,
        span_days: u32,
    ) -> Self {
        Self {
            event_id: event_id.into(),
            group: group.into(),
            date_start,
            span_days,
        }
    }

    fn end_date(&self) -> NaiveDate {
        self.date_start + TimeDelta::days(self.span_days as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    /// The block lies wholly before the series start or after its end.
    OutsideRange,
    /// The block straddles a series boundary.
    Partial,
}

/// An event left out of the returned specs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CalendarWarning {
    pub event: CalendarEvent,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalendarDims {
    /// One spec per group, ordered by group label.
    pub specs: Vec<DimsSpec>,
    pub warnings: Vec<CalendarWarning>,
}

fn check_step(ts: &TimeSeries, steps_per_day: usize) -> Result<()> {
    if steps_per_day == 0 || ts.step() * steps_per_day as i32 != TimeDelta::days(1) {
        return Err(Error::Calendar(format!(
            "{steps_per_day} steps per day inconsistent with a step of {}s",
            ts.step().num_seconds()
        )));
    }
    Ok(())
}

/// Absolute step index of midnight on `date`, negative before the series start.
fn day_index(ts: &TimeSeries, date: NaiveDate) -> Result<i64> {
    let instant = date.and_hms_opt(0, 0, 0).expect("midnight exists");
    let offset = (instant - ts.start()).num_milliseconds();
    let step = ts.step().num_milliseconds();
    if offset % step != 0 {
        return Err(Error::Calendar(format!(
            "{date} does not fall on a series step"
        )));
    }
    Ok(offset / step)
}

/// Groups events, checking spans and overlaps. Events come back sorted.
fn grouped(events: &[CalendarEvent]) -> Result<BTreeMap<&str, Vec<&CalendarEvent>>> {
    let mut sorted: Vec<&CalendarEvent> = events.iter().collect();
    sorted.sort_by(|a, b| {
        (&a.group, a.date_start, &a.event_id).cmp(&(&b.group, b.date_start, &b.event_id))
    });
    let mut groups: BTreeMap<&str, Vec<&CalendarEvent>> = BTreeMap::new();
    for e in sorted {
        if e.span_days == 0 {
            return Err(Error::Calendar(format!(
                "event `{}` has a zero span",
                e.event_id
            )));
        }
        let members = groups.entry(e.group.as_str()).or_default();
        if let Some(prev) = members.last() {
            if prev.span_days != e.span_days {
                return Err(Error::Calendar(format!(
                    "group `{}` mixes spans of {} and {} days",
                    e.group, prev.span_days, e.span_days
                )));
            }
            if e.date_start < prev.end_date() {
                return Err(Error::Calendar(format!(
                    "events `{}` ({}) and `{}` ({}) of group `{}` overlap",
                    prev.event_id, prev.date_start, e.event_id, e.date_start, e.group
                )));
            }
        }
        members.push(e);
    }
    Ok(groups)
}

/// Builds one DIMS per group with the same mode and seed method for all.
pub fn build_dims(
    ts: &TimeSeries,
    events: &[CalendarEvent],
    steps_per_day: usize,
    mode: Combination,
) -> Result<CalendarDims> {
    build_dims_with(ts, events, steps_per_day, |_| (mode, DimsInit::StlBased))
}

/// Builds one DIMS per group; `configure` picks mode and seed method per group.
///
/// Blocks are `span_days * steps_per_day` steps long. Events not wholly
/// inside the series are dropped and reported in `warnings`.
pub fn build_dims_with(
    ts: &TimeSeries,
    events: &[CalendarEvent],
    steps_per_day: usize,
    mut configure: impl FnMut(&str) -> (Combination, DimsInit),
) -> Result<CalendarDims> {
    check_step(ts, steps_per_day)?;
    let n = ts.len() as i64;
    let mut specs = Vec::new();
    let mut warnings = Vec::new();
    for (group, members) in grouped(events)? {
        let length = members[0].span_days as usize * steps_per_day;
        let mut occurrences = Vec::new();
        for e in members {
            let start = day_index(ts, e.date_start)?;
            let end = start + length as i64;
            let reason = if end <= 0 || start >= n {
                Some(DropReason::OutsideRange)
            } else if start < 0 || end > n {
                Some(DropReason::Partial)
            } else {
                None
            };
            match reason {
                None => occurrences.push(start as usize),
                Some(reason) => {
                    log::warn!(
                        "calendar event `{}` on {} dropped: {:?}",
                        e.event_id,
                        e.date_start,
                        reason
                    );
                    warnings.push(CalendarWarning {
                        event: e.clone(),
                        reason,
                    });
                }
            }
        }
        let (mode, init) = configure(group);
        specs.push(DimsSpec::new(group, mode, length, occurrences).with_init(init));
    }
    Ok(CalendarDims { specs, warnings })
}

/// Block starts (absolute indices) of events that reach past the end of
/// `ts` and begin before `horizon_end`, keyed by group, for forecast projection.
pub fn future_occurrences(
    ts: &TimeSeries,
    events: &[CalendarEvent],
    steps_per_day: usize,
    horizon_end: usize,
) -> Result<BTreeMap<String, Vec<usize>>> {
    check_step(ts, steps_per_day)?;
    let n = ts.len() as i64;
    let mut out = BTreeMap::new();
    for (group, members) in grouped(events)? {
        let length = (members[0].span_days as usize * steps_per_day) as i64;
        let mut starts = Vec::new();
        for e in members {
            let start = day_index(ts, e.date_start)?;
            if start >= 0 && start + length > n && start < horizon_end as i64 {
                starts.push(start as usize);
            }
        }
        if !starts.is_empty() {
            out.insert(group.to_string(), starts);
        }
    }
    Ok(out)
}
