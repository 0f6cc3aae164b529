use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::store::{CacheDecision, ContentStore};
use crate::baselines::{BpStrategy, LfumMode, LfumStrategy};
use crate::error::{Error, Result};
use crate::mindelay::online::{FlowEstimator, MinDelayStrategy, RateEstimator};
use crate::topology::{NetworkGraph, NodeId, ObjectId, RoutingGraph};

/// Read-only view of the simulated network handed to strategies.
#[derive(Debug, Clone, Copy)]
pub struct SimNetwork<'a> {
    pub graph: &'a NetworkGraph,
    pub routing: &'a RoutingGraph,
    pub interest_bits: f64,
    pub data_bits: f64,
}

impl SimNetwork<'_> {
    /// `(object, node)` owning a flat routing hop.
    pub fn hop_owner(&self, hop: usize) -> (ObjectId, NodeId) {
        let slot = self.routing.hop_slot(hop);
        let n = self.graph.node_count();
        (slot / n, slot % n)
    }

    /// Position of `hop` within its node's next-hop list.
    pub fn hop_position(&self, hop: usize) -> usize {
        let (k, i) = self.hop_owner(hop);
        hop - self.routing.hop_range(k, i).start
    }
}

/// A forwarding and caching strategy pair.
///
/// Every callback runs on the single simulation thread in event order.
/// Hops are flat routing hop indices; `select_hop` must return one of
/// `routing.hop_range(object, node)`.
pub trait Strategy: Send {
    fn name(&self) -> &'static str;

    /// An exogenous request was generated at `node`.
    fn on_request(&mut self, _net: &SimNetwork<'_>, _node: NodeId, _object: ObjectId, _now: f64) {}

    /// An Interest reached `node`, before the cache lookup.
    fn on_interest(&mut self, _net: &SimNetwork<'_>, _node: NodeId, _object: ObjectId, _now: f64) {}

    fn select_hop(
        &mut self,
        net: &SimNetwork<'_>,
        node: NodeId,
        object: ObjectId,
        rng: &mut ChaCha8Rng,
    ) -> usize;

    /// An Interest left on `hop`.
    fn on_forward(&mut self, _net: &SimNetwork<'_>, _hop: usize, _now: f64) {}

    /// The Data answering an Interest sent on `hop` came back after `rtt`.
    fn on_data(&mut self, _net: &SimNetwork<'_>, _hop: usize, _rtt: f64, _now: f64) {}

    /// Decides whether an uncached object carried by Data enters `store`.
    fn cache_decision(
        &mut self,
        net: &SimNetwork<'_>,
        node: NodeId,
        object: ObjectId,
        store: &ContentStore,
        now: f64,
    ) -> CacheDecision;

    /// Start of every update interval after time 0.
    fn on_interval(&mut self, _net: &SimNetwork<'_>, _now: f64, _caches: &mut [ContentStore]) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyKind {
    #[serde(rename = "mindelay")]
    MinDelay,
    #[serde(rename = "bp")]
    Bp,
    #[serde(rename = "lfum-pi")]
    LfumPi,
    #[serde(rename = "lfum-rtt")]
    LfumRtt,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::MinDelay,
        StrategyKind::Bp,
        StrategyKind::LfumPi,
        StrategyKind::LfumRtt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::MinDelay => "mindelay",
            StrategyKind::Bp => "bp",
            StrategyKind::LfumPi => "lfum-pi",
            StrategyKind::LfumRtt => "lfum-rtt",
        }
    }

    /// Stream offset so that strategies never share random draws.
    pub(crate) fn stream(self) -> u64 {
        match self {
            StrategyKind::MinDelay => 1,
            StrategyKind::Bp => 2,
            StrategyKind::LfumPi => 3,
            StrategyKind::LfumRtt => 4,
        }
    }

    pub fn build(self, net: &SimNetwork<'_>, params: &StrategyParams) -> Box<dyn Strategy> {
        match self {
            StrategyKind::MinDelay => Box::new(MinDelayStrategy::new(net, params)),
            StrategyKind::Bp => Box::new(BpStrategy::new(net, params.update_interval)),
            StrategyKind::LfumPi => Box::new(LfumStrategy::new(net, LfumMode::PendingInterests)),
            StrategyKind::LfumRtt => Box::new(LfumStrategy::new(net, LfumMode::RoundTrip { beta: params.rtt_beta })),
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config(format!("unknown strategy `{s}` (expected mindelay, bp, lfum-pi or lfum-rtt)")))
    }
}

/// Strategy tuning shared by all runs of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyParams {
    /// Seconds between marginal-cost updates (MinDelay) and VIP slots (BP).
    pub update_interval: f64,
    pub flow_estimator: FlowEstimator,
    pub rate_estimator: RateEstimator,
    /// EWMA weight of a new RTT sample.
    pub rtt_beta: f64,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            update_interval: 3.0,
            flow_estimator: FlowEstimator::default(),
            rate_estimator: RateEstimator::default(),
            rtt_beta: 0.125,
        }
    }
}
