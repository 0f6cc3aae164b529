use rand_chacha::ChaCha8Rng;

use crate::mindelay::solve_caching_direction;
use crate::sim::{CacheDecision, ContentStore, SimNetwork, Strategy};
use crate::topology::{NetworkGraph, NodeId, ObjectId, RoutingGraph};

/// Virtual Interest Packet counters driving the BP baseline.
///
/// Per slot, every link moves up to its Data capacity (in objects per
/// slot) of VIPs for the single object with the largest positive counter
/// differential into the next hop's counter. Cached objects drain at the
/// node's total egress capacity and sources absorb their own objects.
#[derive(Debug, Clone, PartialEq)]
pub struct VipState {
    node_count: usize,
    counters: Vec<f64>,
    arrivals: Vec<f64>,
    inflow: Vec<f64>,
    desired: Vec<bool>,
}

impl VipState {
    pub fn new(node_count: usize, object_count: usize) -> Self {
        let slots = node_count * object_count;
        VipState {
            node_count,
            counters: vec![0.0; slots],
            arrivals: vec![0.0; slots],
            inflow: vec![0.0; slots],
            desired: vec![false; slots],
        }
    }

    fn slot(&self, node: NodeId, object: ObjectId) -> usize {
        object * self.node_count + node
    }

    pub fn counter(&self, node: NodeId, object: ObjectId) -> f64 {
        self.counters[self.slot(node, object)]
    }

    pub fn set_counter(&mut self, node: NodeId, object: ObjectId, value: f64) {
        let s = self.slot(node, object);
        self.counters[s] = value;
    }

    /// VIPs that entered the node during the last slot.
    pub fn inflow(&self, node: NodeId, object: ObjectId) -> f64 {
        self.inflow[self.slot(node, object)]
    }

    pub fn set_inflow(&mut self, node: NodeId, object: ObjectId, value: f64) {
        let s = self.slot(node, object);
        self.inflow[s] = value;
    }

    /// An exogenous request arrived during the current slot.
    pub fn record_arrival(&mut self, node: NodeId, object: ObjectId) {
        let s = self.slot(node, object);
        self.arrivals[s] += 1.0;
    }

    pub fn is_desired(&self, node: NodeId, object: ObjectId) -> bool {
        self.desired[self.slot(node, object)]
    }
}

/// Position of the next hop with the largest positive differential
/// `V_i(k) - V_j(k)`; the lowest id among equals and when none is
/// positive.
pub fn bp_forward(vip: &VipState, routing: &RoutingGraph, node: NodeId, object: ObjectId) -> usize {
    let own = vip.counter(node, object);
    let mut best = 0;
    let mut best_weight = 0.0;
    for (pos, &j) in routing.next_hops(object, node).iter().enumerate() {
        let w = own - vip.counter(j, object);
        if w > best_weight {
            best = pos;
            best_weight = w;
        }
    }
    best
}

/// Advances every counter by one slot of `slot_length` seconds.
pub fn vip_slot_update(
    vip: &mut VipState,
    graph: &NetworkGraph,
    routing: &RoutingGraph,
    slot_length: f64,
    data_bits: f64,
    is_cached: impl Fn(NodeId, ObjectId) -> bool,
) {
    let n = graph.node_count();
    let start = vip.counters.clone();
    let mut remaining = start.clone();
    let mut received = vec![0.0; start.len()];
    for link in 0..graph.links().len() {
        let allocation = graph.data_capacity(link) * slot_length / data_bits;
        let mut choice: Option<(usize, usize, f64)> = None;
        for &h in routing.link_hops(link) {
            let s = routing.hop_slot(h);
            let target = (s / n) * n + routing.hop_target(h);
            let w = start[s] - start[target];
            if w > choice.map_or(0.0, |c| c.2) {
                choice = Some((s, target, w));
            }
        }
        if let Some((s, target, _)) = choice {
            let moved = allocation.min(remaining[s]);
            remaining[s] -= moved;
            received[target] += moved;
        }
    }
    let drain: Vec<f64> = (0..n)
        .map(|i| {
            graph.out_links(i).iter().map(|&l| graph.link(l).capacity).sum::<f64>() * slot_length / data_bits
        })
        .collect();
    for s in 0..start.len() {
        let (k, i) = (s / n, s % n);
        vip.inflow[s] = vip.arrivals[s] + received[s];
        vip.counters[s] = if graph.is_source(i, k) {
            0.0
        } else {
            let cache_drain = if is_cached(i, k) { drain[i] } else { 0.0 };
            (remaining[s] + vip.arrivals[s] + received[s] - cache_drain).max(0.0)
        };
        vip.arrivals[s] = 0.0;
    }
}

/// The `c_i` objects with the largest inflow at `node`, lowest ids first
/// among equals. Also records them as the node's admission set.
pub fn vip_cache_update(vip: &mut VipState, graph: &NetworkGraph, node: NodeId) -> Vec<ObjectId> {
    let k_count = graph.object_count();
    let metric: Vec<f64> = (0..k_count).map(|k| vip.inflow(node, k)).collect();
    let chosen = solve_caching_direction(&metric, graph.cache_capacity(node));
    let mut set = Vec::new();
    for (k, &c) in chosen.iter().enumerate() {
        let s = vip.slot(node, k);
        vip.desired[s] = c == 1.0;
        if c == 1.0 {
            set.push(k);
        }
    }
    set
}

/// Backpressure forwarding with VIP-based caching.
#[derive(Debug)]
pub struct BpStrategy {
    vip: VipState,
    slot_length: f64,
}

impl BpStrategy {
    pub fn new(net: &SimNetwork<'_>, slot_length: f64) -> Self {
        BpStrategy {
            vip: VipState::new(net.graph.node_count(), net.graph.object_count()),
            slot_length,
        }
    }

    pub fn vip(&self) -> &VipState {
        &self.vip
    }
}

impl Strategy for BpStrategy {
    fn name(&self) -> &'static str {
        "bp"
    }

    fn on_request(&mut self, _net: &SimNetwork<'_>, node: NodeId, object: ObjectId, _now: f64) {
        self.vip.record_arrival(node, object);
    }

    fn select_hop(&mut self, net: &SimNetwork<'_>, node: NodeId, object: ObjectId, _rng: &mut ChaCha8Rng) -> usize {
        net.routing.hop_range(object, node).start + bp_forward(&self.vip, net.routing, node, object)
    }

    fn cache_decision(
        &mut self,
        _net: &SimNetwork<'_>,
        node: NodeId,
        object: ObjectId,
        store: &ContentStore,
        _now: f64,
    ) -> CacheDecision {
        if self.vip.is_desired(node, object) && !store.is_full() {
            CacheDecision::Admit
        } else {
            CacheDecision::Keep
        }
    }

    fn on_interval(&mut self, net: &SimNetwork<'_>, _now: f64, caches: &mut [ContentStore]) {
        vip_slot_update(&mut self.vip, net.graph, net.routing, self.slot_length, net.data_bits, |i, k| {
            caches[i].contains(k)
        });
        for (i, store) in caches.iter_mut().enumerate() {
            vip_cache_update(&mut self.vip, net.graph, i);
            let evict: Vec<ObjectId> = store.iter().filter(|&k| !self.vip.is_desired(i, k)).collect();
            for k in evict {
                store.remove(k);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::FibRule;

    /// Node 0 with next hops 1 and 2 toward source 3.
    fn diamond(cache: usize) -> (NetworkGraph, RoutingGraph) {
        let mut b = NetworkGraph::builder();
        b.nodes(["r", "a", "b", "s"]);
        b.duplex(0, 1, 8.0).duplex(0, 2, 8.0).duplex(1, 3, 8.0).duplex(2, 3, 8.0);
        b.cache(0, cache);
        b.object_size(1.0).sources(vec![vec![3]; 3]);
        let g = b.build().unwrap();
        let r = RoutingGraph::build(&g, FibRule::StrictlyCloser).unwrap();
        (g, r)
    }

    #[test]
    fn forwards_on_largest_differential() {
        let (g, r) = diamond(0);
        let mut v = VipState::new(g.node_count(), g.object_count());
        v.set_counter(0, 0, 10.0);
        v.set_counter(1, 0, 2.0);
        v.set_counter(2, 0, 7.0);
        assert_eq!(bp_forward(&v, &r, 0, 0), 0);
        v.set_counter(1, 0, 12.0);
        v.set_counter(2, 0, 11.0);
        assert_eq!(bp_forward(&v, &r, 0, 0), 0);
        v.set_counter(2, 0, 3.0);
        assert_eq!(bp_forward(&v, &r, 0, 0), 1);
        // Node 1 has a single next hop.
        assert_eq!(bp_forward(&v, &r, 1, 0), 0);
    }

    #[test]
    fn cache_update_takes_top_inflow() {
        let (g, _) = diamond(1);
        let mut v = VipState::new(g.node_count(), g.object_count());
        for (k, m) in [9.0, 4.0, 2.0].into_iter().enumerate() {
            v.set_inflow(0, k, m);
        }
        assert_eq!(vip_cache_update(&mut v, &g, 0), vec![0]);
        let (g0, _) = diamond(0);
        assert!(vip_cache_update(&mut v, &g0, 0).is_empty());
        let mut eq = VipState::new(g.node_count(), g.object_count());
        for k in 0..3 {
            eq.set_inflow(0, k, 1.0);
        }
        assert_eq!(vip_cache_update(&mut eq, &g, 0), vec![0]);
    }

    #[test]
    fn slot_update_rules() {
        let (g, r) = diamond(1);
        let mut v = VipState::new(g.node_count(), g.object_count());
        vip_slot_update(&mut v, &g, &r, 1.0, 1.0, |_, _| false);
        assert!(v.counters.iter().all(|&c| c == 0.0));

        // Allocation 8 per link per slot drains a counter of 5 completely.
        v.set_counter(1, 0, 5.0);
        vip_slot_update(&mut v, &g, &r, 1.0, 1.0, |_, _| false);
        assert_eq!(v.counter(1, 0), 0.0);
        // The VIPs reached the source and left the network.
        assert_eq!(v.counter(3, 0), 0.0);

        for _ in 0..20 {
            v.record_arrival(0, 1);
        }
        vip_slot_update(&mut v, &g, &r, 1.0, 1.0, |_, _| false);
        assert_eq!(v.counter(0, 1), 20.0);
        assert_eq!(v.inflow(0, 1), 20.0);
        vip_slot_update(&mut v, &g, &r, 1.0, 1.0, |_, _| false);
        // Each link moves 8 of object 2's VIPs.
        assert_eq!(v.counter(0, 1), 4.0);
        assert_eq!(v.counter(1, 1) + v.counter(2, 1), 16.0);
        // A cached object drains at the node's egress capacity, 16 per slot.
        let mut cached = v.clone();
        for _ in 0..30 {
            v.record_arrival(0, 1);
            cached.record_arrival(0, 1);
        }
        vip_slot_update(&mut v, &g, &r, 1.0, 1.0, |_, _| false);
        vip_slot_update(&mut cached, &g, &r, 1.0, 1.0, |i, k| i == 0 && k == 1);
        // Both next hops now hold more VIPs than node 1, so nothing moves.
        assert_eq!(v.counter(0, 1), 34.0);
        assert_eq!(cached.counter(0, 1), 18.0);
    }
}
