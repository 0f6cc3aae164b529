//! Strategy × topology × arrival-rate sweeps over several seeds.
//!
//! A plan expands into independent cells, one simulation each. Cells run
//! concurrently through [`Execution`]; a failing cell is recorded and the
//! rest of the plan continues. Aggregates are reduced in a fixed order, so
//! the same plan always yields byte-identical tables.
//!
//! Plan documents are TOML:
//!
//! ```toml
//! topologies = ["abilene", "tree"]
//! strategies = ["mindelay", "lfum-pi"]
//! rates = [1.0, 2.0, 4.0]
//! seeds = 10                 # or an explicit list: [3, 5, 8]
//! preset = "desk"
//! capacity_mbps = 50
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fluid::{FluidProblem, ForwardingCachingPoint};
use crate::mindelay::online::{FlowEstimator, RateEstimator};
use crate::mindelay::{run_fluid_mindelay, RunOptions};
use crate::sim::{self, MetricsLog, SimConfig, StrategyKind, StrategyParams, DEFAULT_INTEREST_BITS};
use crate::topology::{builtin, builtin_names, load_topology, BuiltinOptions, Instance, Preset, RoutingGraph};

/// Sum of per-request delays of a complete log, seconds.
pub fn total_delay(log: &MetricsLog) -> Result<f64> {
    log.total_delay()
}

/// Cache hits per node per second.
pub fn cache_hit_rate(log: &MetricsLog, node_count: usize, horizon: f64) -> f64 {
    sim::cache_hit_rate(log.hits.len(), node_count, horizon)
}

/// Knobs that turn a topology name into an [`Instance`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InstanceOptions {
    pub preset: Preset,
    pub objects: Option<usize>,
    pub cache_size: Option<usize>,
    pub capacity_mbps: Option<f64>,
    /// Data Packet (object) size in bits.
    pub data_bits: Option<f64>,
}

impl InstanceOptions {
    pub fn builtin_options(&self) -> BuiltinOptions {
        let mut opts = BuiltinOptions::from_preset(self.preset);
        if let Some(k) = self.objects {
            opts.objects = k;
        }
        opts.cache_override = self.cache_size;
        opts.capacity_mbps = self.capacity_mbps;
        if let Some(bits) = self.data_bits {
            opts.object_size_bits = bits;
        }
        opts
    }
}

/// A built-in topology by name, otherwise a topology document on disk.
/// Options apply to built-ins only.
pub fn resolve_instance(topology: &str, options: &InstanceOptions) -> Result<Instance> {
    if builtin_names().contains(&topology) {
        return builtin(topology, &options.builtin_options());
    }
    let path = Path::new(topology);
    if path.is_file() {
        return load_topology(path);
    }
    Err(Error::config(format!(
        "unknown topology `{topology}` (built-ins: {}; or a path to a topology file)",
        builtin_names().join(", ")
    )))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Count(u64),
    List(Vec<u64>),
}

impl SeedSpec {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            SeedSpec::Count(n) => (0..*n).collect(),
            SeedSpec::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanDocument {
    pub topologies: Vec<String>,
    pub strategies: Vec<StrategyKind>,
    pub rates: Vec<f64>,
    #[serde(default)]
    pub seeds: Option<SeedSpec>,
    #[serde(default)]
    pub preset: Preset,
    #[serde(default)]
    pub horizon_sec: Option<f64>,
    #[serde(default)]
    pub update_interval_sec: Option<f64>,
    #[serde(default)]
    pub flow_estimator: Option<FlowEstimator>,
    #[serde(default)]
    pub rate_estimator: Option<RateEstimator>,
    #[serde(default)]
    pub objects: Option<usize>,
    #[serde(default)]
    pub cache_size: Option<usize>,
    #[serde(default)]
    pub capacity_mbps: Option<f64>,
    #[serde(default)]
    pub wall_clock_limit_sec: Option<f64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

pub const DEFAULT_SEED_COUNT: u64 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub topologies: Vec<String>,
    pub strategies: Vec<StrategyKind>,
    /// Requests per node per second.
    pub rates: Vec<f64>,
    pub seeds: Vec<u64>,
    pub horizon: f64,
    pub instance: InstanceOptions,
    pub params: StrategyParams,
    pub wall_clock_limit: Option<Duration>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentPlan {
    /// Ten seeds and the horizon of `preset`.
    pub fn new(topologies: Vec<String>, strategies: Vec<StrategyKind>, rates: Vec<f64>, preset: Preset) -> Self {
        ExperimentPlan {
            topologies,
            strategies,
            rates,
            seeds: (0..DEFAULT_SEED_COUNT).collect(),
            horizon: preset.horizon(),
            instance: InstanceOptions {
                preset,
                ..InstanceOptions::default()
            },
            params: StrategyParams::default(),
            wall_clock_limit: None,
            out_dir: None,
        }
    }

    pub fn from_document(doc: PlanDocument) -> Result<Self> {
        let mut plan = ExperimentPlan::new(doc.topologies, doc.strategies, doc.rates, doc.preset);
        if let Some(seeds) = doc.seeds {
            plan.seeds = seeds.seeds();
        }
        if let Some(h) = doc.horizon_sec {
            plan.horizon = h;
        }
        if let Some(t) = doc.update_interval_sec {
            plan.params.update_interval = t;
        }
        if let Some(e) = doc.flow_estimator {
            plan.params.flow_estimator = e;
        }
        if let Some(e) = doc.rate_estimator {
            plan.params.rate_estimator = e;
        }
        plan.instance.objects = doc.objects;
        plan.instance.cache_size = doc.cache_size;
        plan.instance.capacity_mbps = doc.capacity_mbps;
        if let Some(s) = doc.wall_clock_limit_sec {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::config("wall_clock_limit_sec must be positive"));
            }
            plan.wall_clock_limit = Some(Duration::from_secs_f64(s));
        }
        plan.out_dir = doc.out_dir;
        plan.validate()?;
        Ok(plan)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_document(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.topologies.is_empty() || self.strategies.is_empty() || self.rates.is_empty() || self.seeds.is_empty() {
            return Err(Error::config("plan needs at least one topology, strategy, rate and seed"));
        }
        if let Some(r) = self.rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::config(format!("arrival rate {r} must be finite and >= 0")));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        if seeds.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("plan seeds must be distinct"));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::config(format!("horizon {} must be finite and >= 0", self.horizon)));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.topologies.len() * self.strategies.len() * self.rates.len() * self.seeds.len()
    }

    fn sim_config(&self, seed: u64) -> SimConfig {
        SimConfig {
            horizon: self.horizon,
            seed,
            params: self.params,
            interest_bits: DEFAULT_INTEREST_BITS,
            wall_clock_limit: self.wall_clock_limit,
            ..SimConfig::default()
        }
    }
}

/// Scalar outcome of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub total_delay: f64,
    pub mean_delay: f64,
    pub hit_rate: f64,
    pub generated: usize,
    pub anomalies: u64,
    pub trace_hash: u64,
}

impl RunSummary {
    pub fn from_log(log: &MetricsLog) -> Result<Self> {
        Ok(RunSummary {
            total_delay: log.total_delay()?,
            mean_delay: log.mean_delay()?,
            hit_rate: log.cache_hit_rate(),
            generated: log.generated,
            anomalies: log.anomalies.total(),
            trace_hash: log.trace_hash,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub topology: String,
    pub strategy: StrategyKind,
    pub rate: f64,
    pub seed: u64,
    pub result: std::result::Result<RunSummary, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub topology: String,
    pub strategy: StrategyKind,
    pub rate: f64,
    /// Seeds that completed.
    pub seed_count: usize,
    pub delay_mean: f64,
    pub delay_std: f64,
    pub hits_mean: f64,
    pub hits_std: f64,
    pub mean_delay_mean: f64,
    pub failed: usize,
    pub anomalies: u64,
}

/// Mean and sample standard deviation; the std of fewer than two values
/// is 0. Values are summed in sorted order, so the result does not depend
/// on their order.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    if sorted.len() < 2 {
        return (mean, 0.0);
    }
    let mut squares: Vec<f64> = sorted.iter().map(|x| (x - mean) * (x - mean)).collect();
    squares.sort_by(f64::total_cmp);
    (mean, (squares.iter().sum::<f64>() / (n - 1.0)).sqrt())
}

pub const TABLE_HEADER: &str =
    "topology,strategy,rate,seed_count,delay_mean,delay_std,hits_mean,hits_std,mean_delay_mean,failed,anomalies";

pub const RUNS_HEADER: &str = "topology,strategy,rate,seed,status,total_delay,mean_delay,hit_rate,generated,anomalies,trace_hash";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    /// In plan order: topology, strategy, rate, seed.
    pub cells: Vec<CellOutcome>,
    /// In plan order: topology, strategy, rate.
    pub rows: Vec<AggregateRow>,
}

impl ExperimentResult {
    pub fn failures(&self) -> impl Iterator<Item = &CellOutcome> {
        self.cells.iter().filter(|c| c.result.is_err())
    }

    pub fn anomaly_count(&self) -> u64 {
        self.rows.iter().map(|r| r.anomalies).sum()
    }

    pub fn row(&self, topology: &str, strategy: StrategyKind, rate: f64) -> Option<&AggregateRow> {
        self.rows
            .iter()
            .find(|r| r.topology == topology && r.strategy == strategy && r.rate == rate)
    }

    /// Aggregate rows for one topology, with a header line.
    pub fn table_csv(&self, topology: &str) -> String {
        let mut out = format!("{TABLE_HEADER}\n");
        for r in self.rows.iter().filter(|r| r.topology == topology) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.topology,
                r.strategy,
                r.rate,
                r.seed_count,
                r.delay_mean,
                r.delay_std,
                r.hits_mean,
                r.hits_std,
                r.mean_delay_mean,
                r.failed,
                r.anomalies
            );
        }
        out
    }

    /// One row per cell; failed cells carry their error message.
    pub fn runs_csv(&self) -> String {
        let mut out = format!("{RUNS_HEADER}\n");
        for c in &self.cells {
            let _ = match &c.result {
                Ok(s) => writeln!(
                    out,
                    "{},{},{},{},ok,{},{},{},{},{},{:016x}",
                    c.topology, c.strategy, c.rate, c.seed, s.total_delay, s.mean_delay, s.hit_rate, s.generated, s.anomalies, s.trace_hash
                ),
                Err(e) => writeln!(
                    out,
                    "{},{},{},{},{:?},,,,,,",
                    c.topology,
                    c.strategy,
                    c.rate,
                    c.seed,
                    format!("error: {e}")
                ),
            };
        }
        out
    }

    /// Writes `<topology>.csv` per topology and `runs.csv`; returns the
    /// paths written.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut topologies: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !topologies.contains(&r.topology.as_str()) {
                topologies.push(&r.topology);
            }
        }
        for t in topologies {
            let path = dir.join(format!("{}.csv", file_stem(t)));
            std::fs::write(&path, self.table_csv(t))?;
            written.push(path);
        }
        let runs = dir.join("runs.csv");
        std::fs::write(&runs, self.runs_csv())?;
        written.push(runs);
        Ok(written)
    }
}

/// File-name-safe label for a topology given by name or path.
fn file_stem(topology: &str) -> String {
    let base = Path::new(topology)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(topology);
    base.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

struct Prepared {
    instance: Instance,
    routing: RoutingGraph,
}

/// Runs every cell of `plan`. Topologies are resolved up front, so an
/// unknown name fails the whole plan before any simulation starts.
pub fn run_plan(plan: &ExperimentPlan, exec: Execution) -> Result<ExperimentResult> {
    plan.validate()?;
    let prepared: Vec<Prepared> = plan
        .topologies
        .iter()
        .map(|t| {
            let instance = resolve_instance(t, &plan.instance)?;
            let routing = instance.routing()?;
            Ok(Prepared { instance, routing })
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(plan.cell_count());
    for t in 0..plan.topologies.len() {
        for &s in &plan.strategies {
            for &rate in &plan.rates {
                for &seed in &plan.seeds {
                    cells.push((t, s, rate, seed));
                }
            }
        }
    }

    let outcomes = exec.map_slice(&cells, |&(t, strategy, rate, seed)| {
        let p = &prepared[t];
        let result = p
            .instance
            .demand
            .with_rate(rate)
            .materialize(&p.instance.graph)
            .and_then(|demand| sim::run(&p.instance.graph, &p.routing, &demand, strategy, &plan.sim_config(seed)))
            .and_then(|log| RunSummary::from_log(&log))
            .map_err(|e| e.to_string());
        CellOutcome {
            topology: plan.topologies[t].clone(),
            strategy,
            rate,
            seed,
            result,
        }
    });

    Ok(ExperimentResult {
        rows: aggregate(&outcomes),
        cells: outcomes,
    })
}

/// Groups consecutive cells sharing topology, strategy and rate.
fn aggregate(cells: &[CellOutcome]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<usize, Vec<&CellOutcome>> = BTreeMap::new();
    let mut keys: Vec<(&str, StrategyKind, u64)> = Vec::new();
    for c in cells {
        let key = (c.topology.as_str(), c.strategy, c.rate.to_bits());
        let idx = keys.iter().position(|k| *k == key).unwrap_or_else(|| {
            keys.push(key);
            keys.len() - 1
        });
        groups.entry(idx).or_default().push(c);
    }
    groups
        .into_values()
        .map(|group| {
            let ok: Vec<&RunSummary> = group.iter().filter_map(|c| c.result.as_ref().ok()).collect();
            let delays: Vec<f64> = ok.iter().map(|s| s.total_delay).collect();
            let hits: Vec<f64> = ok.iter().map(|s| s.hit_rate).collect();
            let means: Vec<f64> = ok.iter().map(|s| s.mean_delay).collect();
            let (delay_mean, delay_std) = mean_std(&delays);
            let (hits_mean, hits_std) = mean_std(&hits);
            AggregateRow {
                topology: group[0].topology.clone(),
                strategy: group[0].strategy,
                rate: group[0].rate,
                seed_count: ok.len(),
                delay_mean,
                delay_std,
                hits_mean,
                hits_std,
                mean_delay_mean: mean_std(&means).0,
                failed: group.len() - ok.len(),
                anomalies: ok.iter().map(|s| s.anomalies).sum(),
            }
        })
        .collect()
}

/// A single simulation, as read from a scenario document:
///
/// ```toml
/// topology = "tree"
/// strategy = "mindelay"
/// arrival_rate = 2.0
/// seed = 7
/// horizon_sec = 100
/// update_interval_sec = 3
/// interest_bits = 10000
/// data_bits = 4000000
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub topology: String,
    pub strategy: StrategyKind,
    #[serde(default)]
    pub arrival_rate: Option<f64>,
    #[serde(default = "default_scenario_horizon")]
    pub horizon_sec: f64,
    #[serde(default)]
    pub update_interval_sec: Option<f64>,
    #[serde(default)]
    pub flow_estimator: Option<FlowEstimator>,
    #[serde(default)]
    pub rate_estimator: Option<RateEstimator>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub interest_bits: Option<f64>,
    #[serde(default)]
    pub data_bits: Option<f64>,
    #[serde(default)]
    pub preset: Preset,
    #[serde(default)]
    pub objects: Option<usize>,
    #[serde(default)]
    pub cache_size: Option<usize>,
    #[serde(default)]
    pub capacity_mbps: Option<f64>,
}

fn default_scenario_horizon() -> f64 {
    1000.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub topology: String,
    pub strategy: StrategyKind,
    /// Per-requester rate; the topology's own demand when unset.
    pub rate: Option<f64>,
    pub instance: InstanceOptions,
    pub config: SimConfig,
}

impl Scenario {
    pub fn from_document(doc: ScenarioDocument) -> Self {
        let mut config = SimConfig {
            horizon: doc.horizon_sec,
            seed: doc.seed,
            ..SimConfig::default()
        };
        if let Some(t) = doc.update_interval_sec {
            config.params.update_interval = t;
        }
        if let Some(e) = doc.flow_estimator {
            config.params.flow_estimator = e;
        }
        if let Some(e) = doc.rate_estimator {
            config.params.rate_estimator = e;
        }
        if let Some(b) = doc.interest_bits {
            config.interest_bits = b;
        }
        Scenario {
            topology: doc.topology,
            strategy: doc.strategy,
            rate: doc.arrival_rate,
            instance: InstanceOptions {
                preset: doc.preset,
                objects: doc.objects,
                cache_size: doc.cache_size,
                capacity_mbps: doc.capacity_mbps,
                data_bits: doc.data_bits,
            },
            config,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::from_document(toml::from_str(text)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn run(&self) -> Result<(Instance, MetricsLog)> {
        let instance = resolve_instance(&self.topology, &self.instance)?;
        let routing = instance.routing()?;
        let config = match self.rate {
            Some(r) => instance.demand.with_rate(r),
            None => instance.demand.clone(),
        };
        let demand = config.materialize(&instance.graph)?;
        let log = sim::run(&instance.graph, &routing, &demand, self.strategy, &self.config)?;
        Ok((instance, log))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableRateOptions {
    /// Fluid MinDelay steps per probe.
    pub max_steps: usize,
    /// Bisection stops when the bracket is this tight relative to its top.
    pub rel_tol: f64,
    pub exec: Execution,
}

impl Default for StableRateOptions {
    fn default() -> Self {
        StableRateOptions {
            max_steps: 40,
            rel_tol: 0.01,
            exec: Execution::default(),
        }
    }
}

/// Largest per-requester rate at which fluid MinDelay finds a point with
/// finite cost, by doubling and then bisection. Stability is assumed
/// monotone in the rate.
pub fn stable_rate(instance: &Instance, routing: &RoutingGraph, options: &StableRateOptions) -> Result<f64> {
    let unit = instance.demand.with_rate(1.0).materialize(&instance.graph)?;
    if unit.is_zero() {
        return Err(Error::config("topology has no demand to scale"));
    }
    let stable = |rate: f64| -> Result<bool> {
        let demand = unit.scaled(rate);
        let problem = FluidProblem::new(&instance.graph, routing, &demand).with_execution(options.exec);
        let run = RunOptions {
            max_steps: options.max_steps,
            ..RunOptions::default()
        };
        let traj = run_fluid_mindelay(&problem, ForwardingCachingPoint::uniform(routing), &run)?;
        Ok(traj.best_cost.is_finite())
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while stable(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::config("demand never saturates the network"));
        }
    }
    while (hi - lo) > options.rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if stable(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_basics() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[0.1, 0.7, 0.2]), mean_std(&[0.7, 0.2, 0.1]));
    }

    #[test]
    fn plan_document_and_validation() {
        let plan = ExperimentPlan::parse(
            r#"
topologies = ["tree"]
strategies = ["mindelay", "lfum-rtt"]
rates = [1.0]
seeds = [4, 9]
horizon_sec = 5
"#,
        )
        .unwrap();
        assert_eq!(plan.seeds, vec![4, 9]);
        assert_eq!(plan.horizon, 5.0);
        assert_eq!(plan.cell_count(), 4);
        let default = ExperimentPlan::parse("topologies=[\"tree\"]\nstrategies=[\"bp\"]\nrates=[1.0]\n").unwrap();
        assert_eq!(default.seeds.len(), 10);
        assert!(ExperimentPlan::parse("topologies=[]\nstrategies=[\"bp\"]\nrates=[1.0]\n").is_err());
        assert!(ExperimentPlan::parse("topologies=[\"tree\"]\nstrategies=[\"bp\"]\nrates=[1.0]\nseeds=[1,1]\n").is_err());
        assert!(ExperimentPlan::parse("topologies=[\"tree\"]\nstrategies=[\"xx\"]\nrates=[1.0]\n").is_err());
        assert!(ExperimentPlan::parse("topologies=[\"tree\"]\nstrategies=[\"bp\"]\nrates=[1.0]\nbogus=1\n").is_err());
    }

    #[test]
    fn unknown_topology_fails_before_running() {
        let plan = ExperimentPlan::new(vec!["nowhere".into()], vec![StrategyKind::Bp], vec![1.0], Preset::Desk);
        assert!(matches!(run_plan(&plan, Execution::Sequential), Err(Error::Config(_))));
    }

    #[test]
    fn failed_cells_are_recorded() {
        let mut plan = ExperimentPlan::new(vec!["tree".into()], vec![StrategyKind::LfumPi], vec![1.0], Preset::Desk);
        plan.seeds = vec![1, 2];
        plan.horizon = 1.0;
        plan.params.update_interval = 0.0;
        let result = run_plan(&plan, Execution::Sequential).unwrap();
        assert_eq!(result.failures().count(), 2);
        assert_eq!(result.rows[0].seed_count, 0);
        assert_eq!(result.rows[0].failed, 2);
        assert!(result.runs_csv().lines().nth(1).unwrap().contains("error:"));
    }

    #[test]
    fn scenario_document_defaults() {
        let s = Scenario::parse("topology = \"tree\"\nstrategy = \"bp\"\nseed = 7\n").unwrap();
        assert_eq!(s.config.horizon, 1000.0);
        assert_eq!(s.config.seed, 7);
        assert_eq!(s.rate, None);
    }
}
