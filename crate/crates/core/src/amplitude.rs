//! Multiplicative calendar factors and the per-day amplitude vector.
//!
//! Factors are ratios of average sales on the days sharing a calendar feature
//! value (a weekday, a day of the month, a month, an event) to the average over
//! all days. They are estimated on an aggregated node, usually store ×
//! department, and shared by every series below it. The amplitude of a day is
//! the product of the factors that apply to it.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::calendar::{snap_impact_days, CalendarDay, CalendarTable};
use crate::error::{ForecastError, Result};

/// Smallest factor ever produced by estimation.
pub const FACTOR_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    DayOfWeek,
    DayOfMonth,
    MonthOfYear,
}

impl FeatureKind {
    pub fn cardinality(self) -> usize {
        match self {
            FeatureKind::DayOfWeek => 7,
            FeatureKind::DayOfMonth => 31,
            FeatureKind::MonthOfYear => 12,
        }
    }

    /// Zero-based slot of a calendar day for this feature.
    pub fn slot(self, day: &CalendarDay) -> usize {
        match self {
            FeatureKind::DayOfWeek => day.weekday as usize,
            FeatureKind::DayOfMonth => day.day_of_month as usize - 1,
            FeatureKind::MonthOfYear => day.month as usize - 1,
        }
    }
}

impl FromStr for FeatureKind {
    type Err = ForecastError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "day-of-week" | "dow" | "weekday" => Ok(FeatureKind::DayOfWeek),
            "day-of-month" | "dom" => Ok(FeatureKind::DayOfMonth),
            "month-of-year" | "moy" | "month" => Ok(FeatureKind::MonthOfYear),
            other => Err(ForecastError::UnknownFeature(other.to_string())),
        }
    }
}

fn check_history(history: &[u32], calendar: &CalendarTable) -> Result<()> {
    if history.is_empty() {
        return Err(ForecastError::EmptySeries);
    }
    calendar.require(history.len())
}

fn global_mean(history: &[u32]) -> f64 {
    history.iter().map(|&y| y as f64).sum::<f64>() / history.len() as f64
}

/// Bucketed sums and counts; `None` from `bucket` leaves the day out.
fn bucket_means(
    history: &[u32],
    n: usize,
    mut bucket: impl FnMut(usize) -> Option<usize>,
) -> Vec<Option<f64>> {
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    for (t, &y) in history.iter().enumerate() {
        if let Some(b) = bucket(t) {
            sums[b] += y as f64;
            counts[b] += 1;
        }
    }
    sums.into_iter()
        .zip(counts)
        .map(|(s, c)| (c > 0).then(|| s / c as f64))
        .collect()
}

fn to_factor(bucket_mean: f64, global: f64) -> f64 {
    (bucket_mean / global).max(FACTOR_FLOOR)
}

/// Ratio factors for one calendar feature; slots never observed get 1.
pub fn estimate_factor(
    history: &[u32],
    calendar: &CalendarTable,
    kind: FeatureKind,
) -> Result<Vec<f64>> {
    check_history(history, calendar)?;
    let global = global_mean(history);
    let n = kind.cardinality();
    if global == 0.0 {
        return Ok(vec![1.0; n]);
    }
    let means = bucket_means(history, n, |t| Some(kind.slot(calendar.day(t))));
    Ok(means
        .into_iter()
        .map(|m| m.map_or(1.0, |m| to_factor(m, global)))
        .collect())
}

/// Ratio factors for moving events. Events without a past occurrence get 1.
pub fn estimate_event_factors(
    history: &[u32],
    calendar: &CalendarTable,
) -> Result<BTreeMap<String, f64>> {
    check_history(history, calendar)?;
    let global = global_mean(history);
    let mut sums: BTreeMap<String, (f64, usize)> = calendar
        .moving_events()
        .into_iter()
        .map(|e| (e, (0.0, 0)))
        .collect();
    for (t, &y) in history.iter().enumerate() {
        for e in &calendar.day(t).events {
            if let Some(acc) = sums.get_mut(e) {
                acc.0 += y as f64;
                acc.1 += 1;
            }
        }
    }
    Ok(sums
        .into_iter()
        .map(|(e, (s, c))| {
            let f = if c == 0 || global == 0.0 {
                1.0
            } else {
                to_factor(s / c as f64, global)
            };
            (e, f)
        })
        .collect())
}

/// Day-of-month factors split by SNAP flag on a state's impacted slots.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapFactors {
    pub state: String,
    /// Impacted days of the month (1-based).
    pub slots: Vec<u8>,
    /// Factor for a SNAP-flagged day, indexed by day of month − 1.
    pub on_snap: Vec<f64>,
    /// Factor for a non-flagged day in an impacted slot.
    pub off_snap: Vec<f64>,
}

impl SnapFactors {
    fn factor(&self, day: &CalendarDay, snap: bool, plain: &[f64]) -> f64 {
        let idx = day.day_of_month as usize - 1;
        if !self.slots.contains(&day.day_of_month) {
            return plain[idx];
        }
        if snap {
            self.on_snap[idx]
        } else {
            self.off_snap[idx]
        }
    }
}

/// Estimates SNAP-split day-of-month factors for `state`. Returns `None` when
/// the calendar carries no flags for the state or the state has no impacted
/// slots; plain day-of-month factors then apply. Slot/flag combinations with
/// no observation fall back to `plain_dom`.
pub fn estimate_snap_factors(
    history: &[u32],
    calendar: &CalendarTable,
    state: &str,
    plain_dom: &[f64],
) -> Result<Option<SnapFactors>> {
    check_history(history, calendar)?;
    let (Some(state_idx), Some(slots)) = (calendar.state_index(state), snap_impact_days(state))
    else {
        return Ok(None);
    };
    let global = global_mean(history);
    let mut on_snap = plain_dom.to_vec();
    let mut off_snap = plain_dom.to_vec();
    if global > 0.0 {
        let means = bucket_means(history, 62, |t| {
            let day = calendar.day(t);
            if !slots.contains(&day.day_of_month) {
                return None;
            }
            let idx = day.day_of_month as usize - 1;
            Some(if calendar.is_snap(t, state_idx) { 31 + idx } else { idx })
        });
        for idx in 0..31 {
            if let Some(m) = means[31 + idx] {
                on_snap[idx] = to_factor(m, global);
            }
            if let Some(m) = means[idx] {
                off_snap[idx] = to_factor(m, global);
            }
        }
    }
    Ok(Some(SnapFactors {
        state: state.to_string(),
        slots: slots.to_vec(),
        on_snap,
        off_snap,
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorMap {
    pub day_of_week: Vec<f64>,
    pub day_of_month: Vec<f64>,
    pub month_of_year: Vec<f64>,
    pub snap: Option<SnapFactors>,
    pub events: BTreeMap<String, f64>,
}

impl Default for FactorMap {
    fn default() -> Self {
        Self::neutral()
    }
}

impl FactorMap {
    /// All factors equal to one.
    pub fn neutral() -> Self {
        Self {
            day_of_week: vec![1.0; 7],
            day_of_month: vec![1.0; 31],
            month_of_year: vec![1.0; 12],
            snap: None,
            events: BTreeMap::new(),
        }
    }

    /// Estimates every factor kind on an aggregated history. SNAP factors are
    /// estimated only when `snap_state` names a single state.
    pub fn estimate(
        history: &[u32],
        calendar: &CalendarTable,
        snap_state: Option<&str>,
    ) -> Result<Self> {
        let day_of_week = estimate_factor(history, calendar, FeatureKind::DayOfWeek)?;
        let day_of_month = estimate_factor(history, calendar, FeatureKind::DayOfMonth)?;
        let month_of_year = estimate_factor(history, calendar, FeatureKind::MonthOfYear)?;
        let snap = match snap_state {
            Some(state) => estimate_snap_factors(history, calendar, state, &day_of_month)?,
            None => None,
        };
        let events = estimate_event_factors(history, calendar)?;
        Ok(Self {
            day_of_week,
            day_of_month,
            month_of_year,
            snap,
            events,
        })
    }

    /// Factor of the event that applies on `day`: among the day's events with a
    /// factor, the one farthest from 1, ties to the smaller name. Days without
    /// such an event contribute 1.
    pub fn event_factor(&self, day: &CalendarDay) -> f64 {
        let mut best: Option<(&str, f64)> = None;
        for name in &day.events {
            let Some(&f) = self.events.get(name) else {
                continue;
            };
            let effect = (f - 1.0).abs();
            best = match best {
                Some((bn, bf)) => {
                    let beffect = (bf - 1.0).abs();
                    if effect > beffect || (effect == beffect && name.as_str() < bn) {
                        Some((name, f))
                    } else {
                        Some((bn, bf))
                    }
                }
                None => Some((name, f)),
            };
        }
        best.map_or(1.0, |(_, f)| f)
    }
}

/// Per-day multiplier over history plus horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector(Vec<f64>);

impl AmplitudeVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(ForecastError::invalid(format!(
                "amplitude values must be finite and > 0, got {v}"
            )));
        }
        Ok(Self(values))
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![1.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn history(&self, t: usize) -> &[f64] {
        &self.0[..t]
    }

    pub fn future(&self, t: usize, horizon: usize) -> &[f64] {
        &self.0[t..t + horizon]
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// `l_t = dow(t) · dom(t) · moy(t) · event(t)` for the first `days` calendar
/// days. `dom(t)` uses the SNAP split when `snap_state` matches the factors'
/// state.
pub fn compose_amplitude(
    factors: &FactorMap,
    calendar: &CalendarTable,
    snap_state: Option<&str>,
    days: usize,
) -> Result<AmplitudeVector> {
    calendar.require(days)?;
    let snap = match (&factors.snap, snap_state) {
        (Some(s), Some(state)) if s.state == state => {
            calendar.state_index(state).map(|idx| (s, idx))
        }
        _ => None,
    };
    let values = (0..days)
        .map(|t| {
            let day = calendar.day(t);
            let dom = match snap {
                Some((s, idx)) => s.factor(day, calendar.is_snap(t, idx), &factors.day_of_month),
                None => factors.day_of_month[day.day_of_month as usize - 1],
            };
            factors.day_of_week[day.weekday as usize]
                * dom
                * factors.month_of_year[day.month as usize - 1]
                * factors.event_factor(day)
        })
        .collect();
    AmplitudeVector::new(values)
}
