//! Random small instances for property tests, oracles and benchmarks.
//!
//! Graphs are a random spanning tree plus extra duplex links, so every node
//! reaches every source. Each object has one source (occasionally two).
//! Demand is drawn per `(node, object)` and then scaled so that the busiest
//! link runs at a chosen utilization under a reference point.

use rand::seq::index::sample;
use rand::Rng;

use crate::fluid::{FluidProblem, ForwardingCachingPoint};
use crate::topology::{Demand, FibRule, NetworkGraph, RoutingGraph};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub min_objects: usize,
    pub max_objects: usize,
    /// Largest cache at any node.
    pub max_cache: usize,
    /// Probability of each non-tree duplex link.
    pub extra_link_prob: f64,
    /// Resample until no FIB has more entries than this.
    pub max_next_hops: Option<usize>,
    /// Probability that a non-source `(node, object)` pair has demand.
    pub demand_prob: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            min_nodes: 3,
            max_nodes: 8,
            min_objects: 1,
            max_objects: 5,
            max_cache: 2,
            extra_link_prob: 0.35,
            max_next_hops: None,
            demand_prob: 0.7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthInstance {
    pub graph: NetworkGraph,
    pub routing: RoutingGraph,
    pub demand: Demand,
}

impl SynthInstance {
    pub fn problem(&self) -> FluidProblem<'_> {
        FluidProblem::new(&self.graph, &self.routing, &self.demand)
    }

    /// Rescales demand so that the busiest link carries `utilization` of
    /// its capacity at `point`. Link flows are linear in demand for a fixed
    /// point, so the result is exact.
    pub fn scale_to_utilization(&mut self, point: &ForwardingCachingPoint, utilization: f64) {
        let p = self.problem();
        let traffic = p.compute_traffic(point);
        let flows = p.compute_link_flows(&traffic, point);
        let peak = flows
            .iter()
            .enumerate()
            .map(|(l, &f)| f / self.graph.data_capacity(l))
            .fold(0.0, f64::max);
        if peak > 0.0 {
            self.demand = self.demand.scaled(utilization / peak);
        }
    }
}

/// Draws one instance. Panics only if `cfg` is contradictory
/// (e.g. `min_nodes < 2`).
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, cfg: &SynthConfig) -> SynthInstance {
    assert!(cfg.min_nodes >= 2 && cfg.min_nodes <= cfg.max_nodes);
    assert!(cfg.min_objects >= 1 && cfg.min_objects <= cfg.max_objects);
    loop {
        if let Some(inst) = try_instance(rng, cfg) {
            return inst;
        }
    }
}

fn try_instance<R: Rng + ?Sized>(rng: &mut R, cfg: &SynthConfig) -> Option<SynthInstance> {
    let n = rng.random_range(cfg.min_nodes..=cfg.max_nodes);
    let k_count = rng.random_range(cfg.min_objects..=cfg.max_objects);
    let mut b = NetworkGraph::builder();
    for i in 0..n {
        b.node(format!("n{i}"));
    }
    let mut adjacent = vec![vec![false; n]; n];
    for v in 1..n {
        let u = rng.random_range(0..v);
        adjacent[u][v] = true;
    }
    for u in 0..n {
        for v in u + 1..n {
            if !adjacent[u][v] && rng.random_bool(cfg.extra_link_prob) {
                adjacent[u][v] = true;
            }
        }
    }
    for u in 0..n {
        for v in u + 1..n {
            if adjacent[u][v] {
                b.link(u, v, rng.random_range(1.0..4.0));
                b.link(v, u, rng.random_range(1.0..4.0));
            }
        }
    }
    for i in 0..n {
        b.cache(i, rng.random_range(0..=cfg.max_cache));
    }
    let sources: Vec<Vec<usize>> = (0..k_count)
        .map(|_| {
            let count = if n > 2 && rng.random_bool(0.2) { 2 } else { 1 };
            let mut s = sample(rng, n, count).into_vec();
            s.sort_unstable();
            s
        })
        .collect();
    b.object_size(rng.random_range(0.5..2.0)).sources(sources);
    let graph = b.build().ok()?;
    let rule = if rng.random_bool(0.5) {
        FibRule::StrictlyCloser
    } else {
        FibRule::DistanceThenId
    };
    let routing = RoutingGraph::build(&graph, rule).ok()?;
    if let Some(limit) = cfg.max_next_hops {
        let too_wide = (0..k_count).any(|k| (0..n).any(|i| routing.next_hops(k, i).len() > limit));
        if too_wide {
            return None;
        }
    }

    let mut demand = Demand::zeros(n, k_count);
    for k in 0..k_count {
        for i in 0..n {
            if !graph.is_source(i, k) && rng.random_bool(cfg.demand_prob) {
                demand.set_rate(i, k, rng.random_range(0.1..1.0));
            }
        }
    }
    if demand.is_zero() {
        return None;
    }
    Some(SynthInstance {
        graph,
        routing,
        demand,
    })
}

/// A feasible point with every forwarding fraction strictly inside
/// `(0, 1)` where there is a choice and fractional caching within each
/// node's capacity.
pub fn random_interior_point<R: Rng + ?Sized>(
    rng: &mut R,
    graph: &NetworkGraph,
    routing: &RoutingGraph,
) -> ForwardingCachingPoint {
    let mut point = ForwardingCachingPoint::uniform(routing);
    let k_count = graph.object_count();
    for k in 0..k_count {
        for i in 0..graph.node_count() {
            let range = routing.hop_range(k, i);
            let weights: Vec<f64> = range.clone().map(|_| rng.random_range(0.2..1.0)).collect();
            let total: f64 = weights.iter().sum();
            for (p, w) in point.phi[range].iter_mut().zip(weights) {
                *p = w / total;
            }
        }
    }
    for i in 0..graph.node_count() {
        let share = (graph.cache_capacity(i) as f64 / k_count as f64).min(1.0);
        for k in 0..k_count {
            if share > 0.0 && !graph.is_source(i, k) {
                point.set_rho(routing, k, i, share * rng.random_range(0.05..0.95));
            }
        }
    }
    point
}
