#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use issm_forecast::calendar::CalendarTable;
use issm_forecast::data::{SalesSeries, SeriesKey};
use issm_forecast::negbin::NbParams;
use rand::Rng;

/// A Monday.
pub fn start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2013, 1, 7).unwrap()
}

pub fn calendar(days: usize) -> CalendarTable {
    CalendarTable::consecutive(start_date(), days)
        .with_standard_snap("CA")
        .with_standard_snap("TX")
        .with_standard_snap("WI")
}

/// Sample path of the smoothing recursion with negative binomial emissions.
pub fn issm_path<R: Rng>(rng: &mut R, l: &[f64], alpha: f64, theta: f64, z0: f64) -> Vec<u32> {
    let mut z = z0;
    l.iter()
        .map(|&lt| {
            let y = NbParams::floored(z * lt, theta).unwrap().sample(rng) as u32;
            z = alpha * y as f64 / lt + (1.0 - alpha) * z;
            y
        })
        .collect()
}

pub fn key(item: &str, store: &str, state: &str) -> SeriesKey {
    let dept = item.rsplit_once('_').map_or(item, |(d, _)| d);
    let cat = dept.split_once('_').map_or(dept, |(c, _)| c);
    SeriesKey::new(item, dept, cat, store, state)
}

pub fn calendar_csv(cal: &CalendarTable) -> String {
    let mut out = String::from("date,weekday,wm_yr_wk,event_name_1,event_name_2");
    for s in cal.states() {
        let _ = write!(out, ",snap_{s}");
    }
    out.push('\n');
    for (t, day) in cal.days().iter().enumerate() {
        let ev = |i: usize| day.events.get(i).cloned().unwrap_or_default();
        let _ = write!(out, "{},{},{},{},{}", day.date, day.weekday, day.week, ev(0), ev(1));
        for s in 0..cal.states().len() {
            let _ = write!(out, ",{}", u8::from(cal.is_snap(t, s)));
        }
        out.push('\n');
    }
    out
}

/// Wide sales CSV covering days `from..to` (0-based, written as `d_{from+1}`…).
pub fn sales_csv(series: &[SalesSeries], from: usize, to: usize) -> String {
    let mut out = String::from("id,item_id,dept_id,cat_id,store_id,state_id");
    for d in from..to {
        let _ = write!(out, ",d_{}", d + 1);
    }
    out.push('\n');
    for s in series {
        let k = &s.key;
        let _ = write!(out, "{}_evaluation,{},{},{},{},{}", k.id(), k.item, k.dept, k.cat, k.store, k.state);
        for d in from..to {
            let _ = write!(out, ",{}", s.sales[d]);
        }
        out.push('\n');
    }
    out
}

/// Two items in two California stores with `history + horizon` days of sales.
pub fn toy_series(days: usize, seed: u64) -> Vec<SalesSeries> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let cal = calendar(days);
    let dow = [1.3, 0.9, 0.9, 0.95, 1.0, 1.2, 0.75];
    let l: Vec<f64> = cal.days().iter().map(|d| dow[d.weekday as usize]).collect();
    let mut out = Vec::new();
    for (item, base) in [("FOODS_1_001", 3.0), ("FOODS_1_002", 0.6)] {
        for store in ["CA_1", "CA_2"] {
            let sales = issm_path(&mut rng, &l, 0.1, 0.5, base);
            out.push(SalesSeries::new(key(item, store, "CA"), sales));
        }
    }
    out
}

/// Writes `sales.csv` (first `history` days), `actuals.csv` (full span) and
/// `calendar.csv` into `dir`.
pub fn write_inputs(dir: &Path, series: &[SalesSeries], history: usize, total: usize) {
    std::fs::write(dir.join("sales.csv"), sales_csv(series, 0, history)).unwrap();
    std::fs::write(dir.join("actuals.csv"), sales_csv(series, 0, total)).unwrap();
    std::fs::write(dir.join("calendar.csv"), calendar_csv(&calendar(total))).unwrap();
}
