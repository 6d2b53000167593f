//! Strict CSV ingestion of sales histories, calendars and prices.
//!
//! The sales file is wide: an optional `id` column, then `item_id, dept_id,
//! cat_id, store_id, state_id`, then one integer column per day named
//! `d_<k>` with consecutive `k`.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use crate::calendar::CalendarTable;
use crate::error::{ForecastError, Result};

pub const KEY_COLUMNS: [&str; 5] = ["item_id", "dept_id", "cat_id", "store_id", "state_id"];

/// Number of trailing in-sample days whose revenue weights a series.
pub const WEIGHT_WINDOW: usize = 28;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeriesKey {
    pub item: String,
    pub dept: String,
    pub cat: String,
    pub store: String,
    pub state: String,
}

impl SeriesKey {
    pub fn new(item: &str, dept: &str, cat: &str, store: &str, state: &str) -> Self {
        Self {
            item: item.to_string(),
            dept: dept.to_string(),
            cat: cat.to_string(),
            store: store.to_string(),
            state: state.to_string(),
        }
    }

    /// Product-store identifier, e.g. `FOODS_1_001_CA_1`.
    pub fn id(&self) -> String {
        format!("{}_{}", self.item, self.store)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SalesSeries {
    pub key: SeriesKey,
    pub sales: Vec<u32>,
}

impl SalesSeries {
    pub fn new(key: SeriesKey, sales: Vec<u32>) -> Self {
        Self { key, sales }
    }

    pub fn id(&self) -> String {
        self.key.id()
    }
}

/// Contents of a wide sales file. `first_day` is the `k` of the first `d_k`
/// column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SalesTable {
    pub first_day: usize,
    pub series: Vec<SalesSeries>,
}

impl SalesTable {
    pub fn days(&self) -> usize {
        self.series.first().map_or(0, |s| s.sales.len())
    }

    /// Sales of days `from..from + len` in `d_k` numbering, per series.
    pub fn window(&self, from: usize, len: usize) -> Option<Vec<&[u32]>> {
        if from < self.first_day || from + len > self.first_day + self.days() {
            return None;
        }
        let start = from - self.first_day;
        Some(self.series.iter().map(|s| &s.sales[start..start + len]).collect())
    }
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| ForecastError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn day_number(header: &str) -> Option<usize> {
    header.trim().strip_prefix("d_")?.parse().ok()
}

pub fn read_sales<R: Read>(reader: R, path: &str) -> Result<SalesTable> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| ForecastError::data(path, 1, e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    let offset = usize::from(names.first() == Some(&"id"));
    if names.len() < offset + KEY_COLUMNS.len() || names[offset..offset + 5] != KEY_COLUMNS {
        return Err(ForecastError::data(
            path,
            1,
            format!("expected columns {} before the day columns", KEY_COLUMNS.join(",")),
        ));
    }
    let day_start = offset + KEY_COLUMNS.len();
    let first_day = match names.get(day_start).and_then(|h| day_number(h)) {
        Some(k) => k,
        None => return Err(ForecastError::data(path, 1, "no `d_<k>` day columns")),
    };
    for (j, name) in names[day_start..].iter().enumerate() {
        if day_number(name) != Some(first_day + j) {
            return Err(ForecastError::data(
                path,
                1,
                format!("day column `{name}` out of sequence, expected d_{}", first_day + j),
            ));
        }
    }

    let mut series = Vec::new();
    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    let mut store_state: HashMap<String, String> = HashMap::new();
    let mut item_dept: HashMap<String, (String, String)> = HashMap::new();
    for (row_idx, record) in rdr.records().enumerate() {
        let line = row_idx + 2;
        let record = record.map_err(|e| ForecastError::data(path, line, e.to_string()))?;
        let field = |i: usize| record.get(offset + i).unwrap_or("").trim();
        if let Some(i) = (0..5).find(|&i| field(i).is_empty()) {
            return Err(ForecastError::data(path, line, format!("empty `{}`", KEY_COLUMNS[i])));
        }
        let key = SeriesKey::new(field(0), field(1), field(2), field(3), field(4));
        if let Some(prev) = seen.insert((key.item.clone(), key.store.clone()), line) {
            return Err(ForecastError::data(
                path,
                line,
                format!("duplicate series {} (first on line {prev})", key.id()),
            ));
        }
        let state = store_state.entry(key.store.clone()).or_insert_with(|| key.state.clone());
        if *state != key.state {
            return Err(ForecastError::data(
                path,
                line,
                format!("store {} listed under states {state} and {}", key.store, key.state),
            ));
        }
        let parent = item_dept
            .entry(key.item.clone())
            .or_insert_with(|| (key.dept.clone(), key.cat.clone()));
        if parent.0 != key.dept || parent.1 != key.cat {
            return Err(ForecastError::data(
                path,
                line,
                format!("item {} listed under more than one department", key.item),
            ));
        }
        let mut sales = Vec::with_capacity(names.len() - day_start);
        for (j, raw) in record.iter().skip(day_start).enumerate() {
            let raw = raw.trim();
            let v: u32 = raw.parse().map_err(|_| {
                ForecastError::data(
                    path,
                    line,
                    format!("non-integer sale `{raw}` in column d_{}", first_day + j),
                )
            })?;
            sales.push(v);
        }
        series.push(SalesSeries::new(key, sales));
    }
    if series.is_empty() {
        return Err(ForecastError::data(path, 1, "no series rows"));
    }
    Ok(SalesTable { first_day, series })
}

/// Weekly selling prices keyed by store and item.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriceTable {
    prices: HashMap<(String, String), BTreeMap<u32, f64>>,
}

impl PriceTable {
    pub fn insert(&mut self, store: &str, item: &str, week: u32, price: f64) {
        self.prices
            .entry((store.to_string(), item.to_string()))
            .or_default()
            .insert(week, price);
    }

    pub fn price(&self, store: &str, item: &str, week: u32) -> Option<f64> {
        self.prices
            .get(&(store.to_string(), item.to_string()))?
            .get(&week)
            .copied()
    }

    /// Columns `store_id, item_id, week, price`; `wm_yr_wk` and `sell_price`
    /// are accepted as aliases.
    pub fn from_csv<R: Read>(reader: R, path: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| ForecastError::data(path, 1, e.to_string()))?
            .clone();
        let col = |names: &[&str]| {
            headers
                .iter()
                .position(|h| names.contains(&h.trim()))
                .ok_or_else(|| ForecastError::data(path, 1, format!("missing `{}` column", names[0])))
        };
        let store_col = col(&["store_id"])?;
        let item_col = col(&["item_id"])?;
        let week_col = col(&["week", "wm_yr_wk"])?;
        let price_col = col(&["price", "sell_price"])?;

        let mut table = Self::default();
        for (row_idx, record) in rdr.records().enumerate() {
            let line = row_idx + 2;
            let record = record.map_err(|e| ForecastError::data(path, line, e.to_string()))?;
            let get = |c: usize| record.get(c).unwrap_or("").trim();
            let week: u32 = get(week_col)
                .parse()
                .map_err(|_| ForecastError::data(path, line, format!("bad week `{}`", get(week_col))))?;
            let price: f64 = get(price_col)
                .parse()
                .ok()
                .filter(|p: &f64| p.is_finite() && *p >= 0.0)
                .ok_or_else(|| ForecastError::data(path, line, format!("bad price `{}`", get(price_col))))?;
            table.insert(get(store_col), get(item_col), week, price);
        }
        Ok(table)
    }
}

/// Sales history with its calendar and optional prices. All series share
/// the same length `T`, aligned with the first `T` calendar days.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub series: Vec<SalesSeries>,
    pub calendar: CalendarTable,
    pub prices: Option<PriceTable>,
}

impl Dataset {
    pub fn new(series: Vec<SalesSeries>, calendar: CalendarTable, prices: Option<PriceTable>) -> Result<Self> {
        let t = series.first().ok_or(ForecastError::EmptySeries)?.sales.len();
        if t == 0 {
            return Err(ForecastError::EmptySeries);
        }
        if let Some(s) = series.iter().find(|s| s.sales.len() != t) {
            return Err(ForecastError::LengthMismatch {
                expected: t,
                found: s.sales.len(),
            });
        }
        calendar.require(t)?;
        Ok(Self {
            series,
            calendar,
            prices,
        })
    }

    pub fn load(sales: &Path, calendar: &Path, prices: Option<&Path>) -> Result<Self> {
        let table = read_sales(open(sales)?, &sales.display().to_string())?;
        if table.first_day != 1 {
            return Err(ForecastError::data(
                &sales.display().to_string(),
                1,
                "history must start at d_1",
            ));
        }
        let cal = CalendarTable::from_csv(open(calendar)?, &calendar.display().to_string())?;
        let prices = match prices {
            Some(p) => Some(PriceTable::from_csv(open(p)?, &p.display().to_string())?),
            None => None,
        };
        Self::new(table.series, cal, prices)
    }

    pub fn history_len(&self) -> usize {
        self.series[0].sales.len()
    }

    /// Revenue of each series over the last [`WEIGHT_WINDOW`] in-sample days.
    /// Without a price table the weight is unit sales.
    pub fn revenue(&self) -> Result<Vec<f64>> {
        let t = self.history_len();
        let from = t.saturating_sub(WEIGHT_WINDOW);
        self.series
            .iter()
            .map(|s| {
                let mut total = 0.0;
                for day in from..t {
                    let units = s.sales[day];
                    if units == 0 {
                        continue;
                    }
                    let price = match &self.prices {
                        Some(p) => {
                            let week = self.calendar.day(day).week;
                            p.price(&s.key.store, &s.key.item, week).ok_or_else(|| {
                                ForecastError::invalid(format!(
                                    "no price for {} in week {week}",
                                    s.id()
                                ))
                            })?
                        }
                        None => 1.0,
                    };
                    total += units as f64 * price;
                }
                Ok(total)
            })
            .collect()
    }
}
