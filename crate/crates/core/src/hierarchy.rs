//! The twelve aggregation levels and forecasts at each of them.
//!
//! | level | grouping       | id example          |
//! |-------|----------------|---------------------|
//! | 1     | total          | `Total_X`           |
//! | 2     | state          | `CA_X`              |
//! | 3     | store          | `CA_1_X`            |
//! | 4     | category       | `FOODS_X`           |
//! | 5     | department     | `FOODS_1_X`         |
//! | 6     | state × cat    | `CA_FOODS`          |
//! | 7     | state × dept   | `CA_FOODS_1`        |
//! | 8     | store × cat    | `CA_1_FOODS`        |
//! | 9     | store × dept   | `CA_1_FOODS_1`      |
//! | 10    | item           | `FOODS_1_001_X`     |
//! | 11    | item × state   | `FOODS_1_001_CA`    |
//! | 12    | item × store   | `FOODS_1_001_CA_1`  |
//!
//! Levels 1–9 and 12 are fitted and simulated on their own histories. Level-12
//! nodes use the calendar factors of their store-department parent. Levels 10
//! and 11 sum level-12 trajectories with matching indices.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::amplitude::{compose_amplitude, FactorMap};
use crate::calendar::CalendarTable;
use crate::data::{Dataset, SalesSeries, SeriesKey};
use crate::error::{ForecastError, Result};
use crate::issm::{fit, FittedModel, GridSpec};
use crate::simulate::{
    extract_quantiles, generate_trajectories, QuantileForecast, TrajectorySet, COMPETITION_QUANTILES,
    DEFAULT_HORIZON, DEFAULT_TRAJECTORIES,
};

pub const LEVEL_COUNT: u8 = 12;

/// One node of the hierarchy. Fields not used by the level are `None`.
/// Field order gives the output order: level, then state, store, category,
/// department, item.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeKey {
    pub level: u8,
    pub state: Option<String>,
    pub store: Option<String>,
    pub cat: Option<String>,
    pub dept: Option<String>,
    pub item: Option<String>,
}

fn check_level(level: u8) -> Result<()> {
    if (1..=LEVEL_COUNT).contains(&level) {
        Ok(())
    } else {
        Err(ForecastError::invalid(format!("hierarchy level {level} outside 1..=12")))
    }
}

impl NodeKey {
    /// Ancestor of `series` at `level`.
    pub fn for_series(level: u8, series: &SeriesKey) -> Result<Self> {
        check_level(level)?;
        let (state, store, cat, dept, item) = match level {
            1 => (false, false, false, false, false),
            2 => (true, false, false, false, false),
            3 => (true, true, false, false, false),
            4 => (false, false, true, false, false),
            5 => (false, false, true, true, false),
            6 => (true, false, true, false, false),
            7 => (true, false, true, true, false),
            8 => (true, true, true, false, false),
            9 => (true, true, true, true, false),
            10 => (false, false, true, true, true),
            11 => (true, false, true, true, true),
            _ => (true, true, true, true, true),
        };
        let pick = |used: bool, v: &String| used.then(|| v.clone());
        Ok(Self {
            level,
            state: pick(state, &series.state),
            store: pick(store, &series.store),
            cat: pick(cat, &series.cat),
            dept: pick(dept, &series.dept),
            item: pick(item, &series.item),
        })
    }

    pub fn contains(&self, series: &SeriesKey) -> bool {
        let ok = |field: &Option<String>, v: &String| field.as_ref().is_none_or(|f| f == v);
        ok(&self.state, &series.state)
            && ok(&self.store, &series.store)
            && ok(&self.cat, &series.cat)
            && ok(&self.dept, &series.dept)
            && ok(&self.item, &series.item)
    }

    /// The node's state when all its series belong to one.
    pub fn single_state(&self) -> Option<&str> {
        self.state.as_deref()
    }

    /// Submission-style identifier; see the module table.
    pub fn id(&self) -> String {
        fn f(v: &Option<String>) -> &str {
            v.as_deref().unwrap_or("")
        }
        match self.level {
            1 => "Total_X".to_string(),
            2 => format!("{}_X", f(&self.state)),
            3 => format!("{}_X", f(&self.store)),
            4 => format!("{}_X", f(&self.cat)),
            5 => format!("{}_X", f(&self.dept)),
            6 => format!("{}_{}", f(&self.state), f(&self.cat)),
            7 => format!("{}_{}", f(&self.state), f(&self.dept)),
            8 => format!("{}_{}", f(&self.store), f(&self.cat)),
            9 => format!("{}_{}", f(&self.store), f(&self.dept)),
            10 => format!("{}_X", f(&self.item)),
            11 => format!("{}_{}", f(&self.item), f(&self.state)),
            _ => format!("{}_{}", f(&self.item), f(&self.store)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyNode {
    pub key: NodeKey,
    /// Indices of the bottom-level series below the node, ascending.
    pub members: Vec<usize>,
}

/// All nodes of all levels for a set of bottom-level series.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    levels: Vec<Vec<HierarchyNode>>,
}

impl Hierarchy {
    pub fn new(keys: &[SeriesKey]) -> Self {
        let levels = (1..=LEVEL_COUNT)
            .map(|level| {
                let mut groups: BTreeMap<NodeKey, Vec<usize>> = BTreeMap::new();
                for (i, k) in keys.iter().enumerate() {
                    let node = NodeKey::for_series(level, k).expect("level in range");
                    groups.entry(node).or_default().push(i);
                }
                groups
                    .into_iter()
                    .map(|(key, members)| HierarchyNode { key, members })
                    .collect()
            })
            .collect();
        Self { levels }
    }

    pub fn from_series(series: &[SalesSeries]) -> Self {
        let keys: Vec<SeriesKey> = series.iter().map(|s| s.key.clone()).collect();
        Self::new(&keys)
    }

    pub fn level(&self, level: u8) -> &[HierarchyNode] {
        &self.levels[level as usize - 1]
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }
}

fn sum_members(series: &[SalesSeries], members: &[usize]) -> Vec<u32> {
    let mut total = vec![0u32; series[members[0]].sales.len()];
    for &i in members {
        for (acc, &v) in total.iter_mut().zip(&series[i].sales) {
            *acc = acc.saturating_add(v);
        }
    }
    total
}

/// Element-wise sum of every bottom-level series below `target`.
pub fn aggregate_history(bottom: &[SalesSeries], target: &NodeKey) -> Result<Vec<u32>> {
    check_level(target.level)?;
    let members: Vec<usize> = (0..bottom.len())
        .filter(|&i| target.contains(&bottom[i].key))
        .collect();
    let Some(&first) = members.first() else {
        return Err(ForecastError::MissingDescendant(target.id()));
    };
    let t = bottom[first].sales.len();
    if let Some(&i) = members.iter().find(|&&i| bottom[i].sales.len() != t) {
        return Err(ForecastError::LengthMismatch {
            expected: t,
            found: bottom[i].sales.len(),
        });
    }
    Ok(sum_members(bottom, &members))
}

/// Sums children sample by sample: sample `(u, t)` of the result is the sum
/// of sample `(u, t)` over the children.
pub fn overlay_trajectories(children: &[&TrajectorySet], series_id: &str) -> Result<TrajectorySet> {
    let first = children.first().ok_or(ForecastError::EmptyTrajectories)?;
    let (u, h) = (first.trajectories(), first.horizon());
    if let Some(c) = children
        .iter()
        .find(|c| c.trajectories() != u || c.horizon() != h)
    {
        return Err(ForecastError::ShapeMismatch(format!(
            "{} is {} × {}, {} is {u} × {h}",
            c.series_id(),
            c.trajectories(),
            c.horizon(),
            first.series_id()
        )));
    }
    let mut samples = first.samples().to_vec();
    for c in &children[1..] {
        for (acc, &v) in samples.iter_mut().zip(c.samples()) {
            *acc = acc.saturating_add(v);
        }
    }
    TrajectorySet::new(series_id, first.master_seed(), u, h, samples)
}

/// Everything that shapes a forecast apart from the data.
#[derive(Debug, Clone)]
pub struct ForecastSettings {
    pub horizon: usize,
    pub trajectories: usize,
    pub master_seed: u64,
    pub grid: GridSpec,
    pub quantiles: Vec<f64>,
}

impl Default for ForecastSettings {
    fn default() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            trajectories: DEFAULT_TRAJECTORIES,
            master_seed: 0,
            grid: GridSpec::default(),
            quantiles: COMPETITION_QUANTILES.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeForecast {
    pub key: NodeKey,
    pub quantiles: QuantileForecast,
    /// Fitted parameters; `None` for overlay levels.
    pub model: Option<FittedModel>,
}

/// Fits one history and simulates its horizon.
pub fn simulate_node(
    history: &[u32],
    factors: &FactorMap,
    snap_state: Option<&str>,
    calendar: &CalendarTable,
    settings: &ForecastSettings,
    series_id: &str,
) -> Result<(FittedModel, TrajectorySet)> {
    let t = history.len();
    let amplitude = compose_amplitude(factors, calendar, snap_state, t + settings.horizon)?;
    let model = fit(history, amplitude.history(t), &settings.grid)?;
    let ts = generate_trajectories(
        &model,
        amplitude.future(t, settings.horizon),
        settings.trajectories,
        settings.master_seed,
        series_id,
    )?;
    Ok((model, ts))
}

fn history_len(data: &Dataset) -> usize {
    data.series.first().map_or(0, |s| s.sales.len())
}

fn direct_forecast(data: &Dataset, node: &HierarchyNode, settings: &ForecastSettings) -> Result<NodeForecast> {
    let history = sum_members(&data.series, &node.members);
    let state = node.key.single_state();
    let factors = FactorMap::estimate(&history, &data.calendar, state)?;
    let (model, ts) = simulate_node(&history, &factors, state, &data.calendar, settings, &node.key.id())?;
    Ok(NodeForecast {
        key: node.key.clone(),
        quantiles: extract_quantiles(&ts, &settings.quantiles)?,
        model: Some(model),
    })
}

/// Factor maps of the store-department nodes, which level-12 series inherit.
pub fn store_dept_factors(data: &Dataset, hierarchy: &Hierarchy) -> Result<HashMap<NodeKey, FactorMap>> {
    hierarchy
        .level(9)
        .par_iter()
        .map(|node| {
            let history = sum_members(&data.series, &node.members);
            let factors = FactorMap::estimate(&history, &data.calendar, node.key.single_state())?;
            Ok((node.key.clone(), factors))
        })
        .collect()
}

fn bottom_trajectories(
    data: &Dataset,
    index: usize,
    factors: &HashMap<NodeKey, FactorMap>,
    settings: &ForecastSettings,
) -> Result<(FittedModel, TrajectorySet)> {
    let series = &data.series[index];
    let parent = NodeKey::for_series(9, &series.key)?;
    let fm = factors
        .get(&parent)
        .ok_or_else(|| ForecastError::MissingDescendant(parent.id()))?;
    simulate_node(
        &series.sales,
        fm,
        Some(&series.key.state),
        &data.calendar,
        settings,
        &series.id(),
    )
}

/// Level-12 trajectories of every series, keyed by series id.
pub fn simulate_bottom(data: &Dataset, settings: &ForecastSettings) -> Result<BTreeMap<String, TrajectorySet>> {
    let hierarchy = Hierarchy::from_series(&data.series);
    let factors = store_dept_factors(data, &hierarchy)?;
    (0..data.series.len())
        .into_par_iter()
        .map(|i| {
            let (_, ts) = bottom_trajectories(data, i, &factors, settings)?;
            Ok((data.series[i].id(), ts))
        })
        .collect()
}

fn overlay_forecast(
    data: &Dataset,
    node: &HierarchyNode,
    bottom: &BTreeMap<String, TrajectorySet>,
    settings: &ForecastSettings,
) -> Result<NodeForecast> {
    let children = node
        .members
        .iter()
        .map(|&i| {
            let id = data.series[i].id();
            bottom.get(&id).ok_or(ForecastError::MissingDescendant(id))
        })
        .collect::<Result<Vec<_>>>()?;
    let ts = overlay_trajectories(&children, &node.key.id())?;
    Ok(NodeForecast {
        key: node.key.clone(),
        quantiles: extract_quantiles(&ts, &settings.quantiles)?,
        model: None,
    })
}

/// Forecasts every node of one level. Levels 10 and 11 need the level-12
/// trajectories in `bottom`.
pub fn forecast_level(
    level: u8,
    data: &Dataset,
    settings: &ForecastSettings,
    bottom: Option<&BTreeMap<String, TrajectorySet>>,
) -> Result<Vec<NodeForecast>> {
    check_level(level)?;
    let hierarchy = Hierarchy::from_series(&data.series);
    let nodes = hierarchy.level(level);
    match level {
        10 | 11 => {
            let bottom = bottom.ok_or_else(|| {
                ForecastError::MissingDescendant(format!("level {level} needs level-12 trajectories"))
            })?;
            nodes
                .par_iter()
                .map(|n| overlay_forecast(data, n, bottom, settings))
                .collect()
        }
        12 => {
            let factors = store_dept_factors(data, &hierarchy)?;
            nodes
                .par_iter()
                .map(|n| {
                    let (model, ts) = bottom_trajectories(data, n.members[0], &factors, settings)?;
                    Ok(NodeForecast {
                        key: n.key.clone(),
                        quantiles: extract_quantiles(&ts, &settings.quantiles)?,
                        model: Some(model),
                    })
                })
                .collect()
        }
        _ => nodes
            .par_iter()
            .map(|n| direct_forecast(data, n, settings))
            .collect(),
    }
}

/// Forecasts the requested levels. Product-level work runs one item at a
/// time so that only that item's trajectories are held in memory. Output is
/// ordered by node key.
pub fn forecast_hierarchy(data: &Dataset, settings: &ForecastSettings, levels: &[u8]) -> Result<Vec<NodeForecast>> {
    for &l in levels {
        check_level(l)?;
    }
    if history_len(data) == 0 {
        return Err(ForecastError::EmptySeries);
    }
    let wanted = |l: u8| levels.contains(&l);
    let hierarchy = Hierarchy::from_series(&data.series);
    let mut out: Vec<NodeForecast> = Vec::new();

    let direct: Vec<&HierarchyNode> = (1..=9u8)
        .filter(|&l| wanted(l))
        .flat_map(|l| hierarchy.level(l))
        .collect();
    out.extend(
        direct
            .par_iter()
            .map(|n| direct_forecast(data, n, settings))
            .collect::<Result<Vec<_>>>()?,
    );

    if wanted(10) || wanted(11) || wanted(12) {
        let factors = store_dept_factors(data, &hierarchy)?;
        let per_item = hierarchy
            .level(10)
            .par_iter()
            .map(|item| forecast_item(data, item, &factors, settings, &wanted))
            .collect::<Result<Vec<_>>>()?;
        out.extend(per_item.into_iter().flatten());
    }
    out.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(out)
}

fn forecast_item(
    data: &Dataset,
    item: &HierarchyNode,
    factors: &HashMap<NodeKey, FactorMap>,
    settings: &ForecastSettings,
    wanted: &dyn Fn(u8) -> bool,
) -> Result<Vec<NodeForecast>> {
    let mut out = Vec::new();
    let mut bottom: Vec<(usize, TrajectorySet)> = Vec::with_capacity(item.members.len());
    for &i in &item.members {
        let (model, ts) = bottom_trajectories(data, i, factors, settings)?;
        if wanted(12) {
            out.push(NodeForecast {
                key: NodeKey::for_series(12, &data.series[i].key)?,
                quantiles: extract_quantiles(&ts, &settings.quantiles)?,
                model: Some(model),
            });
        }
        bottom.push((i, ts));
    }
    let mut overlay = |key: NodeKey, children: Vec<&TrajectorySet>| -> Result<()> {
        let ts = overlay_trajectories(&children, &key.id())?;
        out.push(NodeForecast {
            key,
            quantiles: extract_quantiles(&ts, &settings.quantiles)?,
            model: None,
        });
        Ok(())
    };
    if wanted(11) {
        let mut by_state: BTreeMap<NodeKey, Vec<&TrajectorySet>> = BTreeMap::new();
        for (i, ts) in &bottom {
            by_state
                .entry(NodeKey::for_series(11, &data.series[*i].key)?)
                .or_default()
                .push(ts);
        }
        for (key, children) in by_state {
            overlay(key, children)?;
        }
    }
    if wanted(10) {
        overlay(item.key.clone(), bottom.iter().map(|(_, ts)| ts).collect())?;
    }
    Ok(out)
}
