//! Daily calendar: weekday, day-of-month, month, per-state SNAP flags and
//! named events.
//!
//! The CSV layout mirrors the competition calendar file:
//! `date, weekday, event_name_1, event_name_2, snap_CA, snap_TX, snap_WI`.
//! Any `snap_<STATE>` column is picked up; an optional `wm_yr_wk` (or `week`)
//! column assigns the week number used to look up sell prices.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use chrono::{Datelike, Duration, NaiveDate};

use crate::error::{ForecastError, Result};

/// Day-of-month slots where SNAP disbursement moves sales, per state.
pub fn snap_impact_days(state: &str) -> Option<&'static [u8]> {
    match state {
        "CA" => Some(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]),
        "WI" => Some(&[2, 3, 5, 6, 8, 9, 11, 12, 14, 15]),
        "TX" => Some(&[1, 3, 5, 6, 7, 9, 11, 12, 13, 15]),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalendarDay {
    pub date: NaiveDate,
    /// 0 = Monday … 6 = Sunday.
    pub weekday: u8,
    pub day_of_month: u8,
    pub month: u8,
    pub week: u32,
    pub events: Vec<String>,
    /// Indexed like [`CalendarTable::states`].
    pub snap: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalendarTable {
    days: Vec<CalendarDay>,
    states: Vec<String>,
}

impl CalendarTable {
    /// A plain calendar of `len` consecutive days with no events or SNAP flags.
    pub fn consecutive(start: NaiveDate, len: usize) -> Self {
        let days = (0..len)
            .map(|i| {
                let date = start + Duration::days(i as i64);
                CalendarDay {
                    date,
                    weekday: date.weekday().num_days_from_monday() as u8,
                    day_of_month: date.day() as u8,
                    month: date.month() as u8,
                    week: 1 + (i / 7) as u32,
                    events: Vec::new(),
                    snap: Vec::new(),
                }
            })
            .collect();
        Self {
            days,
            states: Vec::new(),
        }
    }

    /// Adds (or replaces) a state's SNAP flags using its standard impact days.
    pub fn with_standard_snap(mut self, state: &str) -> Self {
        let slots = snap_impact_days(state).unwrap_or(&[]);
        let flags: Vec<bool> = self
            .days
            .iter()
            .map(|d| slots.contains(&d.day_of_month))
            .collect();
        self.set_snap(state, &flags);
        self
    }

    pub fn set_snap(&mut self, state: &str, flags: &[bool]) {
        assert_eq!(flags.len(), self.days.len(), "one SNAP flag per day");
        let idx = match self.state_index(state) {
            Some(i) => i,
            None => {
                self.states.push(state.to_string());
                for d in &mut self.days {
                    d.snap.push(false);
                }
                self.states.len() - 1
            }
        };
        for (d, &f) in self.days.iter_mut().zip(flags) {
            d.snap[idx] = f;
        }
    }

    pub fn add_event(&mut self, day: usize, name: &str) {
        self.days[day].events.push(name.to_string());
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn days(&self) -> &[CalendarDay] {
        &self.days
    }

    pub fn day(&self, t: usize) -> &CalendarDay {
        &self.days[t]
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    pub fn is_snap(&self, t: usize, state_idx: usize) -> bool {
        self.days[t].snap[state_idx]
    }

    pub fn require(&self, needed: usize) -> Result<()> {
        if self.days.len() < needed {
            return Err(ForecastError::CalendarTooShort {
                needed,
                available: self.days.len(),
            });
        }
        Ok(())
    }

    /// Events observed on more than one distinct month/day. Fixed-date holidays
    /// (and single occurrences) are left to the month and day-of-month factors.
    pub fn moving_events(&self) -> BTreeSet<String> {
        let mut seen: BTreeMap<&str, BTreeSet<(u8, u8)>> = BTreeMap::new();
        for d in &self.days {
            for e in &d.events {
                seen.entry(e.as_str())
                    .or_default()
                    .insert((d.month, d.day_of_month));
            }
        }
        seen.into_iter()
            .filter(|(_, dates)| dates.len() != 1)
            .map(|(name, _)| name.to_string())
            .collect()
    }

    pub fn from_csv<R: Read>(reader: R, path: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| ForecastError::data(path, 1, e.to_string()))?
            .clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let date_col = col("date").ok_or_else(|| ForecastError::data(path, 1, "missing `date` column"))?;
        let weekday_col =
            col("weekday").ok_or_else(|| ForecastError::data(path, 1, "missing `weekday` column"))?;
        let event_cols: Vec<usize> = ["event_name_1", "event_name_2"]
            .iter()
            .filter_map(|n| col(n))
            .collect();
        let week_col = col("wm_yr_wk").or_else(|| col("week"));
        let snap_cols: Vec<(String, usize)> = headers
            .iter()
            .enumerate()
            .filter_map(|(i, h)| h.trim().strip_prefix("snap_").map(|s| (s.to_string(), i)))
            .collect();

        let mut days: Vec<CalendarDay> = Vec::new();
        for (row_idx, record) in rdr.records().enumerate() {
            let line = row_idx + 2;
            let record = record.map_err(|e| ForecastError::data(path, line, e.to_string()))?;
            let raw_date = record.get(date_col).unwrap_or("").trim();
            let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d")
                .map_err(|_| ForecastError::data(path, line, format!("bad date `{raw_date}`")))?;
            if let Some(prev) = days.last() {
                let expected = prev.date + Duration::days(1);
                if date != expected {
                    return Err(ForecastError::data(
                        path,
                        line,
                        format!("date gap: missing {expected} (next row is {date})"),
                    ));
                }
            }
            let raw_wd = record.get(weekday_col).unwrap_or("").trim();
            let weekday: u8 = raw_wd
                .parse()
                .ok()
                .filter(|w| *w <= 6)
                .ok_or_else(|| ForecastError::data(path, line, format!("bad weekday `{raw_wd}`")))?;
            let actual = date.weekday().num_days_from_monday() as u8;
            if weekday != actual {
                return Err(ForecastError::data(
                    path,
                    line,
                    format!("weekday {weekday} does not match {date} (expected {actual})"),
                ));
            }
            let events = event_cols
                .iter()
                .filter_map(|&c| record.get(c))
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect();
            let mut snap = Vec::with_capacity(snap_cols.len());
            for (state, c) in &snap_cols {
                let raw = record.get(*c).unwrap_or("").trim();
                snap.push(match raw {
                    "0" => false,
                    "1" => true,
                    _ => {
                        return Err(ForecastError::data(
                            path,
                            line,
                            format!("bad snap_{state} flag `{raw}`"),
                        ))
                    }
                });
            }
            let week = match week_col {
                Some(c) => {
                    let raw = record.get(c).unwrap_or("").trim();
                    raw.parse()
                        .map_err(|_| ForecastError::data(path, line, format!("bad week `{raw}`")))?
                }
                None => 1 + (days.len() / 7) as u32,
            };
            days.push(CalendarDay {
                date,
                weekday,
                day_of_month: date.day() as u8,
                month: date.month() as u8,
                week,
                events,
                snap,
            });
        }
        Ok(Self {
            days,
            states: snap_cols.into_iter().map(|(s, _)| s).collect(),
        })
    }
}
