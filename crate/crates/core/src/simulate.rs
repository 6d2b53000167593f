//! Monte Carlo trajectories and empirical quantiles.
//!
//! Each trajectory restarts the fitted recursion from the state after the last
//! observation and alternates a negative binomial draw with a state update:
//!
//! ```text
//! y_{t+1} ~ Nb(z_{t+1} · l_{t+1}, θ)
//! z_{t+1} = z_t − (z_t − y_t / l_t) · α
//! ```
//!
//! Trajectory `u` of a series draws from its own ChaCha stream keyed by the
//! master seed and a hash of the series id, so output does not depend on the
//! order in which series or trajectories are generated.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ForecastError, Result};
use crate::issm::FittedModel;
use crate::negbin::NbParams;

/// The nine quantile levels of the competition submission format.
pub const COMPETITION_QUANTILES: [f64; 9] =
    [0.005, 0.025, 0.165, 0.25, 0.5, 0.75, 0.835, 0.975, 0.995];

pub const DEFAULT_TRAJECTORIES: usize = 10_000;
pub const DEFAULT_HORIZON: usize = 28;

/// 64-bit FNV-1a of a series id.
pub fn series_hash(id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Random stream for trajectory `u` of the series hashed to `series`.
pub fn trajectory_rng(master_seed: u64, series: u64, u: u64) -> ChaCha8Rng {
    let key = splitmix64(master_seed ^ splitmix64(series));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(u);
    rng
}

/// `U × H` simulated counts, row-major by trajectory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectorySet {
    series_id: String,
    master_seed: u64,
    trajectories: usize,
    horizon: usize,
    samples: Vec<u32>,
}

impl TrajectorySet {
    pub fn new(
        series_id: impl Into<String>,
        master_seed: u64,
        trajectories: usize,
        horizon: usize,
        samples: Vec<u32>,
    ) -> Result<Self> {
        if trajectories == 0 || horizon == 0 {
            return Err(ForecastError::EmptyTrajectories);
        }
        if samples.len() != trajectories * horizon {
            return Err(ForecastError::ShapeMismatch(format!(
                "{} samples for {trajectories} × {horizon}",
                samples.len()
            )));
        }
        Ok(Self {
            series_id: series_id.into(),
            master_seed,
            trajectories,
            horizon,
            samples,
        })
    }

    pub fn series_id(&self) -> &str {
        &self.series_id
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn trajectories(&self) -> usize {
        self.trajectories
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn samples(&self) -> &[u32] {
        &self.samples
    }

    pub fn trajectory(&self, u: usize) -> &[u32] {
        &self.samples[u * self.horizon..(u + 1) * self.horizon]
    }

    /// Samples of day `day` (zero-based) across trajectories.
    pub fn day(&self, day: usize) -> impl Iterator<Item = u32> + '_ {
        self.samples.iter().skip(day).step_by(self.horizon).copied()
    }

    pub fn day_means(&self) -> Vec<f64> {
        let mut sums = vec![0u64; self.horizon];
        for row in self.samples.chunks_exact(self.horizon) {
            for (s, &v) in sums.iter_mut().zip(row) {
                *s += v as u64;
            }
        }
        sums.into_iter()
            .map(|s| s as f64 / self.trajectories as f64)
            .collect()
    }
}

/// Simulates `trajectories` sample paths over `l_future.len()` days.
pub fn generate_trajectories(
    model: &FittedModel,
    l_future: &[f64],
    trajectories: usize,
    master_seed: u64,
    series_id: &str,
) -> Result<TrajectorySet> {
    let horizon = l_future.len();
    if trajectories == 0 || horizon == 0 {
        return Err(ForecastError::EmptyTrajectories);
    }
    if let Some(v) = l_future.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(ForecastError::invalid(format!("amplitude value {v} is not positive")));
    }
    if !(0.0..=1.0).contains(&model.alpha) || !(model.z_final.is_finite() && model.z_final >= 0.0) {
        return Err(ForecastError::invalid("fitted model out of range"));
    }
    NbParams::floored(1.0, model.theta)?;

    let hash = series_hash(series_id);
    let mut samples = Vec::with_capacity(trajectories * horizon);
    for u in 0..trajectories {
        let mut rng = trajectory_rng(master_seed, hash, u as u64);
        let mut z = model.z_final;
        for &l in l_future {
            let y = NbParams::floored(z * l, model.theta)?.sample(&mut rng);
            let y = u32::try_from(y).unwrap_or(u32::MAX);
            samples.push(y);
            z -= (z - y as f64 / l) * model.alpha;
        }
    }
    TrajectorySet::new(series_id, master_seed, trajectories, horizon, samples)
}

/// Empirical distribution of one simulated day as exact counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    pub total: usize,
    pub counts: BTreeMap<u32, usize>,
}

impl EmpiricalDistribution {
    pub fn pmf(&self, k: u32) -> f64 {
        self.counts.get(&k).map_or(0.0, |&c| c as f64 / self.total as f64)
    }

    pub fn probabilities(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.counts
            .iter()
            .map(|(&k, &c)| (k, c as f64 / self.total as f64))
    }
}

/// Distribution of day `day` (1-based, as in `1..=H`).
pub fn empirical_distribution(ts: &TrajectorySet, day: usize) -> Result<EmpiricalDistribution> {
    if day == 0 || day > ts.horizon {
        return Err(ForecastError::invalid(format!(
            "day {day} outside 1..={}",
            ts.horizon
        )));
    }
    let mut counts = BTreeMap::new();
    for v in ts.day(day - 1) {
        *counts.entry(v).or_insert(0) += 1;
    }
    Ok(EmpiricalDistribution {
        total: ts.trajectories,
        counts,
    })
}

/// Zero-based index of the higher nearest-rank `τ`-quantile among `n` sorted
/// values: rank `⌈τ n⌉` clamped to `[1, n]`. A 1e-9 slack keeps levels such as
/// 0.165 × 10 000 from rounding up a rank.
pub fn nearest_rank_index(n: usize, tau: f64) -> usize {
    let rank = (tau * n as f64 - 1e-9).ceil();
    (rank.max(1.0) as usize).min(n) - 1
}

/// `H × n` matrix of quantile values, one row per forecast day.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileForecast {
    levels: Vec<f64>,
    values: Vec<f64>,
}

pub fn validate_levels(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(ForecastError::invalid("no quantile levels"));
    }
    if levels.iter().any(|&q| !(q > 0.0 && q < 1.0)) || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ForecastError::invalid(
            "quantile levels must be strictly increasing in (0, 1)",
        ));
    }
    Ok(())
}

impl QuantileForecast {
    pub fn new(levels: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_levels(&levels)?;
        if values.is_empty() || !values.len().is_multiple_of(levels.len()) {
            return Err(ForecastError::ShapeMismatch(format!(
                "{} values for {} levels",
                values.len(),
                levels.len()
            )));
        }
        Ok(Self { levels, values })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn horizon(&self) -> usize {
        self.values.len() / self.levels.len()
    }

    pub fn row(&self, day: usize) -> &[f64] {
        let n = self.levels.len();
        &self.values[day * n..(day + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.levels.len())
    }

    /// Values of one level across the horizon.
    pub fn level_series(&self, level_idx: usize) -> Vec<f64> {
        self.rows().map(|r| r[level_idx]).collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.rows().all(|r| r.windows(2).all(|w| w[0] <= w[1]))
    }
}

pub fn extract_quantiles(ts: &TrajectorySet, levels: &[f64]) -> Result<QuantileForecast> {
    validate_levels(levels)?;
    if ts.trajectories == 0 {
        return Err(ForecastError::EmptyTrajectories);
    }
    let mut values = Vec::with_capacity(ts.horizon * levels.len());
    let mut column: Vec<u32> = Vec::with_capacity(ts.trajectories);
    for day in 0..ts.horizon {
        column.clear();
        column.extend(ts.day(day));
        column.sort_unstable();
        for &tau in levels {
            values.push(column[nearest_rank_index(column.len(), tau)] as f64);
        }
    }
    QuantileForecast::new(levels.to_vec(), values)
}
