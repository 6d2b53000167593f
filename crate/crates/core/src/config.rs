//! Run configuration from a flat `key = value` file plus command-line
//! overrides. Lines starting with `#` are comments.
//!
//! ```text
//! sales = data/sales.csv
//! calendar = data/calendar.csv
//! horizon = 28
//! trajectories = 10000
//! levels = 0.05, 0.5, 0.95
//! hierarchy_levels = 1-9, 12
//! theta_count = 12
//! ```

use std::path::{Path, PathBuf};

use crate::error::{ForecastError, Result};
use crate::hierarchy::{ForecastSettings, LEVEL_COUNT};
use crate::issm::{log_spaced, uniform_alphas, GridSpec, SeedAxis};
use crate::simulate::{validate_levels, COMPETITION_QUANTILES, DEFAULT_HORIZON, DEFAULT_TRAJECTORIES};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sales: Option<PathBuf>,
    pub calendar: Option<PathBuf>,
    pub prices: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Submission file scored by `evaluate`.
    pub forecasts: Option<PathBuf>,
    /// Held-out sales scored by `evaluate`.
    pub actuals: Option<PathBuf>,
    /// Directory for per-node fan chart CSVs.
    pub fanchart: Option<PathBuf>,
    pub horizon: usize,
    pub trajectories: usize,
    pub seed: u64,
    /// Quantile levels.
    pub levels: Vec<f64>,
    pub hierarchy_levels: Vec<u8>,
    /// Worker threads; 0 uses every available core.
    pub jobs: usize,
    /// `validation` or `evaluation`, the suffix of submission ids.
    pub phase: String,
    pub alphas: Option<Vec<f64>>,
    pub alpha_count: usize,
    pub thetas: Option<Vec<f64>>,
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_count: usize,
    pub seeds: Option<Vec<f64>>,
    pub seed_count: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sales: None,
            calendar: None,
            prices: None,
            out: None,
            forecasts: None,
            actuals: None,
            fanchart: None,
            horizon: DEFAULT_HORIZON,
            trajectories: DEFAULT_TRAJECTORIES,
            seed: 0,
            levels: COMPETITION_QUANTILES.to_vec(),
            hierarchy_levels: (1..=LEVEL_COUNT).collect(),
            jobs: 0,
            phase: "evaluation".to_string(),
            alphas: None,
            alpha_count: 51,
            thetas: None,
            theta_min: 0.01,
            theta_max: 10.0,
            theta_count: 24,
            seeds: None,
            seed_count: 16,
        }
    }
}

fn bad(key: &str, value: &str) -> ForecastError {
    ForecastError::Config(format!("invalid value `{value}` for `{key}`"))
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|v| number(key, v.trim()))
        .collect()
}

/// Comma-separated levels and inclusive ranges, e.g. `1-9, 12`, or `all`.
fn level_list(key: &str, value: &str) -> Result<Vec<u8>> {
    if value.eq_ignore_ascii_case("all") {
        return Ok((1..=LEVEL_COUNT).collect());
    }
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim) {
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (number::<u8>(key, a.trim())?, number::<u8>(key, b.trim())?),
            None => {
                let v = number::<u8>(key, part)?;
                (v, v)
            }
        };
        if lo == 0 || hi > LEVEL_COUNT || lo > hi {
            return Err(bad(key, part));
        }
        out.extend(lo..=hi);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let path = || Some(PathBuf::from(value));
        match key {
            "sales" => self.sales = path(),
            "calendar" => self.calendar = path(),
            "prices" => self.prices = path(),
            "out" => self.out = path(),
            "forecasts" => self.forecasts = path(),
            "actuals" => self.actuals = path(),
            "fanchart" | "emit_fanchart" => self.fanchart = path(),
            "horizon" => self.horizon = number(key, value)?,
            "trajectories" => self.trajectories = number(key, value)?,
            "seed" => self.seed = number(key, value)?,
            "levels" | "quantiles" => self.levels = list(key, value)?,
            "hierarchy_levels" => self.hierarchy_levels = level_list(key, value)?,
            "jobs" => self.jobs = number(key, value)?,
            "phase" => {
                if value != "validation" && value != "evaluation" {
                    return Err(bad(key, value));
                }
                self.phase = value.to_string();
            }
            "alphas" => self.alphas = Some(list(key, value)?),
            "alpha_count" => self.alpha_count = number(key, value)?,
            "thetas" => self.thetas = Some(list(key, value)?),
            "theta_min" => self.theta_min = number(key, value)?,
            "theta_max" => self.theta_max = number(key, value)?,
            "theta_count" => self.theta_count = number(key, value)?,
            "seeds" => self.seeds = Some(list(key, value)?),
            "seed_count" => self.seed_count = number(key, value)?,
            _ => return Err(ForecastError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ForecastError::Config(format!("{origin}:{}: expected `key = value`", i + 1))
            })?;
            self.set(key.trim(), value).map_err(|e| match e {
                ForecastError::Config(m) => ForecastError::Config(format!("{origin}:{}: {m}", i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ForecastError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let alphas = self.alphas.clone().unwrap_or_else(|| uniform_alphas(self.alpha_count));
        let thetas = match &self.thetas {
            Some(t) => t.clone(),
            None => {
                if !(self.theta_min > 0.0 && self.theta_min <= self.theta_max) {
                    return Err(ForecastError::Config("theta_min must be in (0, theta_max]".into()));
                }
                log_spaced(self.theta_min, self.theta_max, self.theta_count)
            }
        };
        let seeds = match &self.seeds {
            Some(s) => SeedAxis::Explicit(s.clone()),
            None => match SeedAxis::default() {
                SeedAxis::Relative {
                    lo_factor,
                    hi_factor,
                    lo_min,
                    hi_min,
                    ..
                } => SeedAxis::Relative {
                    count: self.seed_count,
                    lo_factor,
                    hi_factor,
                    lo_min,
                    hi_min,
                },
                explicit => explicit,
            },
        };
        GridSpec::new(alphas, thetas, seeds).map_err(|e| ForecastError::Config(e.to_string()))
    }

    pub fn settings(&self) -> Result<ForecastSettings> {
        if self.horizon == 0 {
            return Err(ForecastError::Config("horizon must be >= 1".into()));
        }
        if self.trajectories == 0 {
            return Err(ForecastError::Config("trajectories must be >= 1".into()));
        }
        validate_levels(&self.levels).map_err(|e| ForecastError::Config(e.to_string()))?;
        if self.hierarchy_levels.is_empty() {
            return Err(ForecastError::Config("no hierarchy levels selected".into()));
        }
        Ok(ForecastSettings {
            horizon: self.horizon,
            trajectories: self.trajectories,
            master_seed: self.seed,
            grid: self.grid()?,
            quantiles: self.levels.clone(),
        })
    }

    pub fn require<'a>(&self, name: &str, value: &'a Option<PathBuf>) -> Result<&'a Path> {
        value
            .as_deref()
            .ok_or_else(|| ForecastError::Config(format!("missing required `{name}`")))
    }
}
