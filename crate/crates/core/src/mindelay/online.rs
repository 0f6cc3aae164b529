//! Per-packet MinDelay inside the simulator.
//!
//! Every node keeps a [`MarginalCostTable`]. At the start of each update
//! interval it turns the previous interval's counters into link-flow and
//! request-rate estimates, recomputes `δ_ij(k) = D'_ij(F_ij) + ∂D/∂r_j(k)/L`
//! from the values its next hops reported, and reports its own
//! `∂D/∂r_i(k)` to the nodes that forward object `k` through it. Between
//! updates, Interests follow the cached argmin hop and Data Packets enter
//! the cache when their score `t_i(k) δ_i(k)` beats the smallest cached
//! score.

use std::collections::{BTreeSet, HashMap};
use std::str::FromStr;

use ordered_float::OrderedFloat;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::argmin_index;
use crate::error::{Error, Result};
use crate::fluid::{weighted, LinkCostModel, MM1};
use crate::sim::{CacheDecision, ContentStore, SimNetwork, Strategy, StrategyParams};
use crate::topology::{LinkId, NetworkGraph, NodeId, ObjectId, RoutingGraph};

/// Which counter estimates the Data flow `F_ij` of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowEstimator {
    /// Interests forwarded on `(i,j)` times the Data size.
    #[default]
    InterestRate,
    /// Data bits received back over `(j,i)`.
    DataRate,
}

impl FromStr for FlowEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interest-rate" => Ok(FlowEstimator::InterestRate),
            "data-rate" => Ok(FlowEstimator::DataRate),
            other => Err(Error::config(format!(
                "unknown flow estimator `{other}` (expected interest-rate or data-rate)"
            ))),
        }
    }
}

/// How `t_i(k)` is estimated from Interest counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateEstimator {
    /// Interests since the start of the run over elapsed time.
    #[default]
    SinceStart,
    /// Interests in the last interval over its length.
    LastInterval,
}

impl FromStr for RateEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "since-start" => Ok(RateEstimator::SinceStart),
            "last-interval" => Ok(RateEstimator::LastInterval),
            other => Err(Error::config(format!(
                "unknown rate estimator `{other}` (expected since-start or last-interval)"
            ))),
        }
    }
}

/// `∂D/∂r_from(k)` reported by a next hop to one of its upstream users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlMessage {
    pub object: ObjectId,
    pub from: NodeId,
    pub to: NodeId,
    pub value: f64,
}

/// A node's view of marginal forwarding costs.
#[derive(Debug, Clone)]
pub struct MarginalCostTable {
    node: NodeId,
    /// Nominal interval length, seconds.
    pub interval: f64,
    pub last_update: f64,
    /// Values that were not refreshed before being used.
    pub stale: u64,
    offsets: Vec<usize>,
    next_hops: Vec<NodeId>,
    hop_out: Vec<usize>,
    out_links: Vec<LinkId>,
    capacities: Vec<f64>,
    link_derivative: Vec<f64>,
    delta: Vec<f64>,
    received: Vec<f64>,
    fresh: Vec<bool>,
    realized: Vec<f64>,
    forwarded: Vec<u64>,
    link_interests: Vec<u64>,
    link_data: Vec<u64>,
    interests: Vec<u64>,
    total_interests: Vec<u64>,
    rate: Vec<f64>,
    best: Vec<Option<usize>>,
    delta_min: Vec<f64>,
    dd_dr: Vec<f64>,
}

impl MarginalCostTable {
    /// Cold-start table: every link is assumed empty and every reported
    /// marginal is 0, so `δ_ij(k) = D'_ij(0)`.
    pub fn new(graph: &NetworkGraph, routing: &RoutingGraph, node: NodeId, interval: f64) -> Self {
        Self::with_cost_model(graph, routing, node, interval, &MM1)
    }

    pub fn with_cost_model(
        graph: &NetworkGraph,
        routing: &RoutingGraph,
        node: NodeId,
        interval: f64,
        cost_model: &dyn LinkCostModel,
    ) -> Self {
        let out_links = graph.out_links(node).to_vec();
        let capacities: Vec<f64> = out_links.iter().map(|&l| graph.data_capacity(l)).collect();
        let k_count = graph.object_count();
        let mut offsets = Vec::with_capacity(k_count + 1);
        let mut next_hops = Vec::new();
        let mut hop_out = Vec::new();
        offsets.push(0);
        for k in 0..k_count {
            for &link in routing.hop_links(k, node) {
                next_hops.push(graph.link(link).to);
                hop_out.push(out_links.iter().position(|&l| l == link).expect("hop over an out link"));
            }
            offsets.push(next_hops.len());
        }
        let hops = next_hops.len();
        let link_derivative = capacities.iter().map(|&c| cost_model.derivative(0.0, c)).collect();
        let mut table = MarginalCostTable {
            node,
            interval,
            last_update: 0.0,
            stale: 0,
            offsets,
            next_hops,
            hop_out,
            link_interests: vec![0; out_links.len()],
            link_data: vec![0; out_links.len()],
            out_links,
            capacities,
            link_derivative,
            delta: vec![0.0; hops],
            received: vec![0.0; hops],
            fresh: vec![true; hops],
            realized: vec![0.0; hops],
            forwarded: vec![0; hops],
            interests: vec![0; k_count],
            total_interests: vec![0; k_count],
            rate: vec![0.0; k_count],
            best: vec![None; k_count],
            delta_min: vec![0.0; k_count],
            dd_dr: vec![0.0; k_count],
        };
        for k in 0..k_count {
            table.recompute_delta(k, 1.0);
            if let Some(b) = table.best[k] {
                table.realized[table.offsets[k] + b] = 1.0;
            }
        }
        table
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    fn range(&self, object: ObjectId) -> std::ops::Range<usize> {
        self.offsets[object]..self.offsets[object + 1]
    }

    pub fn next_hops(&self, object: ObjectId) -> &[NodeId] {
        &self.next_hops[self.range(object)]
    }

    /// `δ_ij(k)` in next-hop order.
    pub fn delta(&self, object: ObjectId) -> &[f64] {
        &self.delta[self.range(object)]
    }

    pub fn delta_min(&self, object: ObjectId) -> f64 {
        self.delta_min[object]
    }

    /// Last reported `∂D/∂r_i(k)` of this node.
    pub fn dd_dr(&self, object: ObjectId) -> f64 {
        self.dd_dr[object]
    }

    /// Estimated `t_i(k)`, requests/sec, as of the last update.
    pub fn rate(&self, object: ObjectId) -> f64 {
        self.rate[object]
    }

    /// `t_i(k) δ_i(k)`.
    pub fn cache_score(&self, object: ObjectId) -> f64 {
        weighted(self.rate[object], self.delta_min[object])
    }

    pub fn record_interest(&mut self, object: ObjectId) {
        self.interests[object] += 1;
    }

    /// An Interest for `object` left on the `position`-th next hop.
    pub fn record_forward(&mut self, object: ObjectId, position: usize) {
        let h = self.offsets[object] + position;
        self.forwarded[h] += 1;
        self.link_interests[self.hop_out[h]] += 1;
    }

    /// Data for `object` came back over the `position`-th next hop.
    pub fn record_data(&mut self, object: ObjectId, position: usize) {
        let h = self.offsets[object] + position;
        self.link_data[self.hop_out[h]] += 1;
    }

    /// Ends the current interval: returns the measured `F_ij` of every out
    /// link, refreshes the rate estimates and the realized forwarding
    /// split, and resets the per-interval counters. The run starts at 0.
    pub fn close_interval(
        &mut self,
        now: f64,
        flow: FlowEstimator,
        rate: RateEstimator,
        data_bits: f64,
    ) -> Vec<(LinkId, f64)> {
        let elapsed = now - self.last_update;
        let elapsed = if elapsed > 0.0 { elapsed } else { self.interval };
        let counts = match flow {
            FlowEstimator::InterestRate => &self.link_interests,
            FlowEstimator::DataRate => &self.link_data,
        };
        let flows = self
            .out_links
            .iter()
            .zip(counts)
            .map(|(&l, &c)| (l, c as f64 * data_bits / elapsed))
            .collect();
        for (k, count) in self.interests.iter_mut().enumerate() {
            self.total_interests[k] += *count;
            self.rate[k] = match rate {
                RateEstimator::LastInterval => *count as f64 / elapsed,
                RateEstimator::SinceStart if now > 0.0 => self.total_interests[k] as f64 / now,
                RateEstimator::SinceStart => 0.0,
            };
            *count = 0;
        }
        for k in 0..self.best.len() {
            let range = self.range(k);
            let total: u64 = self.forwarded[range.clone()].iter().sum();
            for h in range.clone() {
                self.realized[h] = if total > 0 {
                    self.forwarded[h] as f64 / total as f64
                } else if Some(h - range.start) == self.best[k] {
                    1.0
                } else {
                    0.0
                };
                self.forwarded[h] = 0;
            }
        }
        self.link_interests.iter_mut().for_each(|c| *c = 0);
        self.link_data.iter_mut().for_each(|c| *c = 0);
        self.fresh.iter_mut().for_each(|f| *f = false);
        self.last_update = now;
        flows
    }

    /// Recomputes `D'_ij` from network-wide link flows.
    pub fn set_link_flows(&mut self, flows: &[f64], cost_model: &dyn LinkCostModel) {
        for (idx, &l) in self.out_links.iter().enumerate() {
            self.link_derivative[idx] = cost_model.derivative(flows[l], self.capacities[idx]);
        }
    }

    pub fn receive(&mut self, msg: &ControlMessage) {
        debug_assert_eq!(msg.to, self.node);
        let range = self.range(msg.object);
        let pos = self.next_hops[range.clone()]
            .binary_search(&msg.from)
            .expect("report from a next hop");
        self.received[range.start + pos] = msg.value;
        self.fresh[range.start + pos] = true;
    }

    fn recompute_delta(&mut self, object: ObjectId, data_bits: f64) {
        let range = self.range(object);
        for h in range.clone() {
            if !self.fresh[h] {
                self.stale += 1;
            }
            self.delta[h] = self.link_derivative[self.hop_out[h]] + self.received[h] / data_bits;
        }
        self.best[object] = argmin_index(&self.delta[range.clone()]);
        self.delta_min[object] = self.best[object].map_or(0.0, |b| self.delta[range.start + b]);
    }

    /// Refreshes `δ_ij(k)` for one object and returns this node's
    /// `∂D/∂r_i(k) = (1-ρ_i(k)) L Σ_j φ_ij(k) δ_ij(k)` with `φ` the split
    /// realized over the last interval. A source reports 0.
    pub fn refresh_object(&mut self, object: ObjectId, cached: bool, data_bits: f64) -> f64 {
        self.recompute_delta(object, data_bits);
        let range = self.range(object);
        let sum: f64 = range.map(|h| weighted(self.realized[h], self.delta[h])).sum();
        let rho = if cached { 1.0 } else { 0.0 };
        self.dd_dr[object] = weighted(1.0 - rho, data_bits * sum);
        self.dd_dr[object]
    }
}

/// Argmin next hop position cached at the last update; `None` at a source.
pub fn online_forwarding_decision(table: &MarginalCostTable, object: ObjectId) -> Option<usize> {
    table.best[object]
}

/// One synchronous round of the marginal-cost protocol.
///
/// Objects are processed independently from their sources outward, so
/// every node hears from all its next hops before computing its own value.
/// `flows` holds the measured `F_ij` of every link.
pub fn update_marginal_tables(
    tables: &mut [MarginalCostTable],
    routing: &RoutingGraph,
    flows: &[f64],
    cost_model: &dyn LinkCostModel,
    data_bits: f64,
    is_cached: impl Fn(NodeId, ObjectId) -> bool,
) {
    for table in tables.iter_mut() {
        table.set_link_flows(flows, cost_model);
    }
    for k in 0..routing.object_count() {
        for &i in routing.order(k) {
            let value = tables[i].refresh_object(k, is_cached(i, k), data_bits);
            for &l in routing.incoming(k, i) {
                tables[l].receive(&ControlMessage {
                    object: k,
                    from: i,
                    to: l,
                    value,
                });
            }
        }
    }
}

/// Scores of the cached objects with O(1) access to the minimum.
#[derive(Debug, Clone, Default)]
pub struct CacheScoreStore {
    scores: HashMap<ObjectId, f64>,
    order: BTreeSet<(OrderedFloat<f64>, ObjectId)>,
}

impl CacheScoreStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn contains(&self, object: ObjectId) -> bool {
        self.scores.contains_key(&object)
    }

    pub fn score(&self, object: ObjectId) -> Option<f64> {
        self.scores.get(&object).copied()
    }

    pub fn insert(&mut self, object: ObjectId, score: f64) {
        self.remove(object);
        self.scores.insert(object, score);
        self.order.insert((OrderedFloat(score), object));
    }

    pub fn remove(&mut self, object: ObjectId) -> bool {
        match self.scores.remove(&object) {
            Some(old) => self.order.remove(&(OrderedFloat(old), object)),
            None => false,
        }
    }

    /// Smallest score; the lowest object id among equals.
    pub fn min(&self) -> Option<(ObjectId, f64)> {
        self.order.first().map(|&(s, k)| (k, s.0))
    }

    pub fn clear(&mut self) {
        self.scores.clear();
        self.order.clear();
    }
}

/// Admit when there is room; otherwise replace the minimum-score object
/// only if `score` is strictly larger.
pub fn online_cache_decision(cached: &CacheScoreStore, capacity: usize, score: f64) -> CacheDecision {
    if capacity == 0 {
        return CacheDecision::Keep;
    }
    if cached.len() < capacity {
        return CacheDecision::Admit;
    }
    match cached.min() {
        Some((victim, min)) if score > min => CacheDecision::Replace(victim),
        _ => CacheDecision::Keep,
    }
}

/// MinDelay forwarding and caching for the simulator.
#[derive(Debug)]
pub struct MinDelayStrategy {
    tables: Vec<MarginalCostTable>,
    scores: Vec<CacheScoreStore>,
    flow: FlowEstimator,
    rate: RateEstimator,
}

impl MinDelayStrategy {
    pub fn new(net: &SimNetwork<'_>, params: &StrategyParams) -> Self {
        let n = net.graph.node_count();
        MinDelayStrategy {
            tables: (0..n)
                .map(|i| MarginalCostTable::new(net.graph, net.routing, i, params.update_interval))
                .collect(),
            scores: vec![CacheScoreStore::new(); n],
            flow: params.flow_estimator,
            rate: params.rate_estimator,
        }
    }

    pub fn tables(&self) -> &[MarginalCostTable] {
        &self.tables
    }
}

impl Strategy for MinDelayStrategy {
    fn name(&self) -> &'static str {
        "mindelay"
    }

    fn on_interest(&mut self, _net: &SimNetwork<'_>, node: NodeId, object: ObjectId, _now: f64) {
        self.tables[node].record_interest(object);
    }

    fn select_hop(&mut self, net: &SimNetwork<'_>, node: NodeId, object: ObjectId, _rng: &mut ChaCha8Rng) -> usize {
        let start = net.routing.hop_range(object, node).start;
        start + online_forwarding_decision(&self.tables[node], object).unwrap_or(0)
    }

    fn on_forward(&mut self, net: &SimNetwork<'_>, hop: usize, _now: f64) {
        let (k, i) = net.hop_owner(hop);
        self.tables[i].record_forward(k, net.hop_position(hop));
    }

    fn on_data(&mut self, net: &SimNetwork<'_>, hop: usize, _rtt: f64, _now: f64) {
        let (k, i) = net.hop_owner(hop);
        self.tables[i].record_data(k, net.hop_position(hop));
    }

    fn cache_decision(
        &mut self,
        _net: &SimNetwork<'_>,
        node: NodeId,
        object: ObjectId,
        store: &ContentStore,
        _now: f64,
    ) -> CacheDecision {
        let score = self.tables[node].cache_score(object);
        let scores = &mut self.scores[node];
        let decision = online_cache_decision(scores, store.capacity(), score);
        match decision {
            CacheDecision::Keep => {}
            CacheDecision::Admit => scores.insert(object, score),
            CacheDecision::Replace(victim) => {
                scores.remove(victim);
                scores.insert(object, score);
            }
        }
        decision
    }

    fn on_interval(&mut self, net: &SimNetwork<'_>, now: f64, caches: &mut [ContentStore]) {
        let mut flows = vec![0.0; net.graph.links().len()];
        for table in &mut self.tables {
            for (l, f) in table.close_interval(now, self.flow, self.rate, net.data_bits) {
                flows[l] = f;
            }
        }
        update_marginal_tables(&mut self.tables, net.routing, &flows, &MM1, net.data_bits, |i, k| {
            caches[i].contains(k)
        });
        for (i, scores) in self.scores.iter_mut().enumerate() {
            scores.clear();
            for k in caches[i].iter() {
                scores.insert(k, self.tables[i].cache_score(k));
            }
        }
    }
}
