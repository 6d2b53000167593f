//! Scaled pinball loss, its revenue-weighted average across series, and two
//! naive baselines to compare against.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{ForecastError, Result};
use crate::simulate::{nearest_rank_index, validate_levels, QuantileForecast};

/// Lower bound on the SPL scale so that constant histories stay finite.
pub const SCALE_FLOOR: f64 = 1e-9;

/// Observations per weekday used by the seasonal naive baseline.
pub const SNAIVE_WEEKS: usize = 8;

pub fn pinball(y: f64, q: f64, tau: f64) -> f64 {
    if y >= q {
        tau * (y - q)
    } else {
        (1.0 - tau) * (q - y)
    }
}

/// Mean absolute first difference of the in-sample series, floored at
/// [`SCALE_FLOOR`].
pub fn spl_scale(insample: &[u32]) -> Result<f64> {
    if insample.len() < 2 {
        return Err(ForecastError::EmptyInsample);
    }
    let total: f64 = insample
        .windows(2)
        .map(|w| (w[1] as f64 - w[0] as f64).abs())
        .sum();
    Ok((total / (insample.len() - 1) as f64).max(SCALE_FLOOR))
}

/// Mean pinball loss over all levels and days, divided by [`spl_scale`].
pub fn spl(actuals: &[f64], qf: &QuantileForecast, insample: &[u32]) -> Result<f64> {
    if actuals.len() != qf.horizon() {
        return Err(ForecastError::HorizonMismatch {
            actuals: actuals.len(),
            forecast: qf.horizon(),
        });
    }
    let scale = spl_scale(insample)?;
    let mut total = 0.0;
    for (row, &y) in qf.rows().zip(actuals) {
        for (&q, &tau) in row.iter().zip(qf.levels()) {
            total += pinball(y, q, tau);
        }
    }
    Ok(total / (qf.levels().len() * actuals.len()) as f64 / scale)
}

/// `Σ w_i spl_i / Σ w_i`. Levels whose weights sum to zero are averaged with
/// equal weights.
pub fn weighted_level_score(spl: &[f64], weights: &[f64]) -> Result<f64> {
    if spl.is_empty() {
        return Err(ForecastError::invalid("no series in level"));
    }
    if spl.len() != weights.len() {
        return Err(ForecastError::LengthMismatch {
            expected: spl.len(),
            found: weights.len(),
        });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(ForecastError::invalid("weights must be finite and >= 0"));
    }
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        return Ok(spl.iter().sum::<f64>() / spl.len() as f64);
    }
    Ok(spl.iter().zip(weights).map(|(s, w)| s * w).sum::<f64>() / total)
}

/// Mean over levels of each level's weighted score. Each entry is one
/// level's `(spl, weights)`.
pub fn wspl(levels: &[(&[f64], &[f64])]) -> Result<f64> {
    if levels.is_empty() {
        return Err(ForecastError::invalid("no levels to score"));
    }
    let mut total = 0.0;
    for (spl, weights) in levels {
        total += weighted_level_score(spl, weights)?;
    }
    Ok(total / levels.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// Last value plus empirical quantiles of one-step changes.
    Naive,
    /// Empirical quantiles of the last [`SNAIVE_WEEKS`] same-weekday values.
    SeasonalNaive,
}

fn empirical_quantile(sorted: &[f64], tau: f64) -> f64 {
    sorted[nearest_rank_index(sorted.len(), tau)]
}

pub fn baseline_quantiles(kind: Baseline, insample: &[u32], h: usize, levels: &[f64]) -> Result<QuantileForecast> {
    validate_levels(levels)?;
    if h == 0 {
        return Err(ForecastError::invalid("horizon must be >= 1"));
    }
    let t = insample.len();
    let mut values = Vec::with_capacity(h * levels.len());
    match kind {
        Baseline::Naive => {
            if t < 2 {
                return Err(ForecastError::EmptyInsample);
            }
            let mut changes: Vec<f64> = insample
                .windows(2)
                .map(|w| w[1] as f64 - w[0] as f64)
                .collect();
            changes.sort_by(f64::total_cmp);
            let last = insample[t - 1] as f64;
            let row: Vec<f64> = levels
                .iter()
                .map(|&tau| (last + empirical_quantile(&changes, tau)).max(0.0))
                .collect();
            for _ in 0..h {
                values.extend_from_slice(&row);
            }
        }
        Baseline::SeasonalNaive => {
            if t < 7 {
                return Err(ForecastError::InsufficientHistory { required: 7, found: t });
            }
            for d in 0..h {
                let target = t + d;
                let mut obs: Vec<f64> = (1..)
                    .map(|k| target as isize - 7 * k as isize)
                    .skip_while(|&j| j >= t as isize)
                    .take_while(|&j| j >= 0)
                    .take(SNAIVE_WEEKS)
                    .map(|j| insample[j as usize] as f64)
                    .collect();
                obs.sort_by(f64::total_cmp);
                values.extend(levels.iter().map(|&tau| empirical_quantile(&obs, tau)));
            }
        }
    }
    QuantileForecast::new(levels.to_vec(), values)
}

/// Scores of one forecast node against its actuals.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesScore {
    pub series_id: String,
    pub level: u8,
    pub spl: f64,
    pub naive_spl: f64,
    pub snaive_spl: f64,
    /// Revenue weight before normalisation.
    pub revenue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSummary {
    pub model: f64,
    pub naive: f64,
    pub snaive: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub series: Vec<SeriesScore>,
    /// Weights normalised to sum to one within each level, parallel to `series`.
    pub weights: Vec<f64>,
    pub levels: BTreeMap<u8, LevelSummary>,
    pub overall: LevelSummary,
}

impl ScoreReport {
    pub fn new(series: Vec<SeriesScore>) -> Result<Self> {
        let mut by_level: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
        for (i, s) in series.iter().enumerate() {
            by_level.entry(s.level).or_default().push(i);
        }
        if by_level.is_empty() {
            return Err(ForecastError::invalid("nothing to score"));
        }
        let mut weights = vec![0.0; series.len()];
        let mut levels = BTreeMap::new();
        for (&level, idx) in &by_level {
            let raw: Vec<f64> = idx.iter().map(|&i| series[i].revenue).collect();
            let total: f64 = raw.iter().sum();
            for (&i, &r) in idx.iter().zip(&raw) {
                weights[i] = if total > 0.0 { r / total } else { 1.0 / idx.len() as f64 };
            }
            let pick = |f: fn(&SeriesScore) -> f64| -> Result<f64> {
                let spl: Vec<f64> = idx.iter().map(|&i| f(&series[i])).collect();
                weighted_level_score(&spl, &raw)
            };
            levels.insert(
                level,
                LevelSummary {
                    model: pick(|s| s.spl)?,
                    naive: pick(|s| s.naive_spl)?,
                    snaive: pick(|s| s.snaive_spl)?,
                },
            );
        }
        let n = levels.len() as f64;
        let overall = LevelSummary {
            model: levels.values().map(|l| l.model).sum::<f64>() / n,
            naive: levels.values().map(|l| l.naive).sum::<f64>() / n,
            snaive: levels.values().map(|l| l.snaive).sum::<f64>() / n,
        };
        Ok(Self {
            series,
            weights,
            levels,
            overall,
        })
    }

    /// `series_id,level,spl,weight` rows, then per level and overall the
    /// weighted scores of the model and both baselines with weight 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("series_id,level,spl,weight\n");
        for (s, w) in self.series.iter().zip(&self.weights) {
            let _ = writeln!(out, "{},{},{},{}", s.series_id, s.level, s.spl, w);
        }
        let mut summary = |level: &str, l: &LevelSummary| {
            let _ = writeln!(out, "WSPL_model,{level},{},1", l.model);
            let _ = writeln!(out, "WSPL_naive,{level},{},1", l.naive);
            let _ = writeln!(out, "WSPL_snaive,{level},{},1", l.snaive);
        };
        for (level, l) in &self.levels {
            summary(&level.to_string(), l);
        }
        summary("all", &self.overall);
        out
    }
}
