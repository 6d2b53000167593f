//! End-to-end runs: read inputs, forecast or score, write CSV outputs.
//!
//! Submission rows are `id,F1,…,Fh` with
//! `id = <node id>_<quantile level, 3 decimals>_<phase>`, one row per node
//! and quantile level.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::data::{open, read_sales, Dataset};
use crate::error::{ForecastError, Result};
use crate::evaluate::{baseline_quantiles, spl, Baseline, ScoreReport, SeriesScore};
use crate::hierarchy::{forecast_hierarchy, Hierarchy, NodeForecast};
use crate::simulate::QuantileForecast;

/// Decimal with at most three fractional digits and no trailing zeros.
pub fn format_value(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn row_id(node_id: &str, level: f64, phase: &str) -> String {
    format!("{node_id}_{level:.3}_{phase}")
}

pub fn submission_csv(forecasts: &[NodeForecast], horizon: usize, phase: &str) -> String {
    let mut out = String::from("id");
    for d in 1..=horizon {
        let _ = write!(out, ",F{d}");
    }
    out.push('\n');
    for f in forecasts {
        let node = f.key.id();
        for (qi, &level) in f.quantiles.levels().iter().enumerate() {
            out.push_str(&row_id(&node, level, phase));
            for row in f.quantiles.rows() {
                out.push(',');
                out.push_str(&format_value(row[qi]));
            }
            out.push('\n');
        }
    }
    out
}

/// Submission rows keyed by id.
pub fn read_submission<R: Read>(reader: R, path: &str) -> Result<HashMap<String, Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| ForecastError::data(path, 1, e.to_string()))?
        .clone();
    if headers.get(0).map(str::trim) != Some("id") || headers.len() < 2 {
        return Err(ForecastError::data(path, 1, "expected `id,F1,...` header"));
    }
    let mut rows = HashMap::new();
    for (row_idx, record) in rdr.records().enumerate() {
        let line = row_idx + 2;
        let record = record.map_err(|e| ForecastError::data(path, line, e.to_string()))?;
        let id = record.get(0).unwrap_or("").trim().to_string();
        let values = record
            .iter()
            .skip(1)
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| ForecastError::data(path, line, format!("bad value `{v}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if rows.insert(id.clone(), values).is_some() {
            return Err(ForecastError::data(path, line, format!("duplicate id `{id}`")));
        }
    }
    Ok(rows)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| ForecastError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn with_pool<T: Send>(jobs: usize, work: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ForecastError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(work))
}

/// Long-format `date,level,value` rows for one node.
pub fn fanchart_csv(forecast: &NodeForecast, dates: &[String]) -> String {
    let mut out = String::from("date,level,value\n");
    for (row, date) in forecast.quantiles.rows().zip(dates) {
        for (&level, &v) in forecast.quantiles.levels().iter().zip(row) {
            let _ = writeln!(out, "{date},{level},{}", format_value(v));
        }
    }
    out
}

pub fn load_dataset(config: &RunConfig) -> Result<Dataset> {
    let sales = config.require("sales", &config.sales)?;
    let calendar = config.require("calendar", &config.calendar)?;
    Dataset::load(sales, calendar, config.prices.as_deref())
}

/// Forecasts the configured hierarchy levels and writes the submission file
/// (and fan charts when requested). Returns the forecasts.
pub fn run_forecast(config: &RunConfig) -> Result<Vec<NodeForecast>> {
    let settings = config.settings()?;
    let out = config.require("out", &config.out)?;
    let data = load_dataset(config)?;
    let t = data.history_len();
    data.calendar.require(t + settings.horizon)?;

    let forecasts = with_pool(config.jobs, || {
        forecast_hierarchy(&data, &settings, &config.hierarchy_levels)
    })??;
    write_file(out, &submission_csv(&forecasts, settings.horizon, &config.phase))?;

    if let Some(dir) = &config.fanchart {
        std::fs::create_dir_all(dir).map_err(|source| ForecastError::Io {
            path: dir.clone(),
            source,
        })?;
        let dates: Vec<String> = (t..t + settings.horizon)
            .map(|i| data.calendar.day(i).date.to_string())
            .collect();
        for f in &forecasts {
            write_file(&dir.join(format!("{}.csv", f.key.id())), &fanchart_csv(f, &dates))?;
        }
    }
    Ok(forecasts)
}

/// Scores a submission against held-out sales and writes the report.
pub fn run_evaluate(config: &RunConfig) -> Result<ScoreReport> {
    let levels = &config.levels;
    crate::simulate::validate_levels(levels).map_err(|e| ForecastError::Config(e.to_string()))?;
    let forecasts_path = config.require("forecasts", &config.forecasts)?;
    let actuals_path = config.require("actuals", &config.actuals)?;
    let out = config.require("out", &config.out)?;
    let data = load_dataset(config)?;
    let t = data.history_len();

    let submission = read_submission(open(forecasts_path)?, &forecasts_path.display().to_string())?;
    let horizon = submission.values().next().map_or(0, Vec::len);
    if horizon == 0 {
        return Err(ForecastError::data(&forecasts_path.display().to_string(), 1, "no forecast rows"));
    }

    let actual_table = read_sales(open(actuals_path)?, &actuals_path.display().to_string())?;
    let window = actual_table.window(t + 1, horizon).ok_or(ForecastError::HorizonMismatch {
        actuals: (actual_table.first_day + actual_table.days()).saturating_sub(t + 1),
        forecast: horizon,
    })?;
    let by_id: HashMap<String, &[u32]> = actual_table
        .series
        .iter()
        .zip(window)
        .map(|(s, w)| (s.id(), w))
        .collect();
    let actuals: Vec<&[u32]> = data
        .series
        .iter()
        .map(|s| {
            by_id
                .get(&s.id())
                .copied()
                .ok_or_else(|| ForecastError::MissingDescendant(format!("actuals for {}", s.id())))
        })
        .collect::<Result<_>>()?;
    let revenue = data.revenue()?;
    let hierarchy = Hierarchy::from_series(&data.series);

    let nodes: Vec<_> = config
        .hierarchy_levels
        .iter()
        .flat_map(|&l| hierarchy.level(l))
        .collect();
    let scores = with_pool(config.jobs, || {
        nodes
            .par_iter()
            .map(|node| {
                let id = node.key.id();
                let mut values = Vec::with_capacity(horizon * levels.len());
                let mut rows = Vec::with_capacity(levels.len());
                for &q in levels {
                    let rid = row_id(&id, q, &config.phase);
                    let row = submission.get(&rid).ok_or(ForecastError::MissingForecast(rid))?;
                    if row.len() != horizon {
                        return Err(ForecastError::HorizonMismatch {
                            actuals: horizon,
                            forecast: row.len(),
                        });
                    }
                    rows.push(row);
                }
                for d in 0..horizon {
                    values.extend(rows.iter().map(|r| r[d]));
                }
                let qf = QuantileForecast::new(levels.clone(), values)?;
                let mut history = vec![0u32; t];
                let mut actual = vec![0.0; horizon];
                let mut weight = 0.0;
                for &i in &node.members {
                    for (acc, &v) in history.iter_mut().zip(&data.series[i].sales) {
                        *acc = acc.saturating_add(v);
                    }
                    for (acc, &v) in actual.iter_mut().zip(actuals[i]) {
                        *acc += v as f64;
                    }
                    weight += revenue[i];
                }
                let naive = baseline_quantiles(Baseline::Naive, &history, horizon, levels)?;
                let snaive = baseline_quantiles(Baseline::SeasonalNaive, &history, horizon, levels)?;
                Ok(SeriesScore {
                    series_id: id,
                    level: node.key.level,
                    spl: spl(&actual, &qf, &history)?,
                    naive_spl: spl(&actual, &naive, &history)?,
                    snaive_spl: spl(&actual, &snaive, &history)?,
                    revenue: weight,
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let report = ScoreReport::new(scores)?;
    write_file(out, &report.to_csv())?;
    Ok(report)
}
