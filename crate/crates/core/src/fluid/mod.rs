//! Fluid model of request and Data traffic.
//!
//! Requests for object `k` enter node `i` at rate `r_i(k)`. A fraction
//! `ρ_i(k)` of the total arrivals `t_i(k)` is served from the local cache
//! and the rest is split over the next hops with fractions `φ_ij(k)`. The
//! Data traffic induced on link `(i, j)` is `F_ij = Σ_k L t_i(k)(1-ρ_i(k))φ_ij(k)`
//! bits/sec and travels on the reverse link, whose capacity bounds it.
//!
//! Marginal forwarding costs are kept per bit of Data:
//!
//! ```text
//! δ_ij(k)    = D'_ij(F_ij) + ∂D/∂r_j(k) / L
//! ∂D/∂r_i(k) = (1-ρ_i(k)) L Σ_j φ_ij(k) δ_ij(k)        (0 at a source)
//! ∂D/∂φ_ij(k) = (1-ρ_i(k)) L t_i(k) δ_ij(k)
//! ∂D/∂ρ_i(k)  = -L t_i(k) Σ_j φ_ij(k) δ_ij(k)
//! ```
//!
//! All recursions run in the topological order of the loop-free routing
//! graph, so every quantity is computed exactly in one pass per object.

pub mod conditions;
mod point;
mod cost;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::topology::{Demand, NetworkGraph, NodeId, ObjectId, RoutingGraph};

pub use conditions::{check_modified_conditions, default_tolerance, ConditionReport};
pub use cost::{link_cost, link_cost_derivative, LinkCostModel, MM1};
pub use point::{load_point, parse_point, point_to_toml, PointDocument};

/// `w * x`, with `0 * ∞ = 0`: a zero weight removes a saturated term.
#[inline]
pub(crate) fn weighted(w: f64, x: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * x
    }
}

/// Forwarding fractions (flat per hop) and caching variables (per slot).
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardingCachingPoint {
    pub phi: Vec<f64>,
    pub rho: Vec<f64>,
}

impl ForwardingCachingPoint {
    /// Uniform split over every FIB, nothing cached.
    pub fn uniform(routing: &RoutingGraph) -> Self {
        let mut phi = vec![0.0; routing.hop_count()];
        for k in 0..routing.object_count() {
            for i in 0..routing.node_count() {
                let range = routing.hop_range(k, i);
                let share = 1.0 / range.len() as f64;
                phi[range].iter_mut().for_each(|p| *p = share);
            }
        }
        ForwardingCachingPoint {
            phi,
            rho: vec![0.0; routing.slot_count()],
        }
    }

    pub fn phi(&self, routing: &RoutingGraph, object: ObjectId, node: NodeId) -> &[f64] {
        &self.phi[routing.hop_range(object, node)]
    }

    pub fn rho(&self, routing: &RoutingGraph, object: ObjectId, node: NodeId) -> f64 {
        self.rho[routing.slot(object, node)]
    }

    /// Sends all of `node`'s object traffic to `next_hop`.
    pub fn route(&mut self, routing: &RoutingGraph, object: ObjectId, node: NodeId, next_hop: NodeId) {
        let range = routing.hop_range(object, node);
        let hops = routing.next_hops(object, node);
        assert!(hops.contains(&next_hop), "{next_hop} is not a next hop");
        for (p, &j) in self.phi[range].iter_mut().zip(hops) {
            *p = if j == next_hop { 1.0 } else { 0.0 };
        }
    }

    pub fn set_rho(&mut self, routing: &RoutingGraph, object: ObjectId, node: NodeId, value: f64) {
        self.rho[routing.slot(object, node)] = value;
    }

    /// True when every caching variable is 0 or 1.
    pub fn is_integral(&self) -> bool {
        self.rho.iter().all(|&r| r == 0.0 || r == 1.0)
    }

    /// Checks the simplex, box and cache-capacity constraints within `tol`.
    pub fn validate(&self, graph: &NetworkGraph, routing: &RoutingGraph, tol: f64) -> Result<()> {
        if self.phi.len() != routing.hop_count() || self.rho.len() != routing.slot_count() {
            return Err(Error::Infeasible("dimension mismatch".into()));
        }
        let n = graph.node_count();
        for k in 0..graph.object_count() {
            for i in 0..n {
                let phi = self.phi(routing, k, i);
                if phi.iter().any(|&p| !(p >= -tol && p <= 1.0 + tol)) {
                    return Err(Error::Infeasible(format!(
                        "forwarding fraction out of [0,1] at node {i}, object {}",
                        k + 1
                    )));
                }
                if !phi.is_empty() {
                    let sum: f64 = phi.iter().sum();
                    if (sum - 1.0).abs() > tol {
                        return Err(Error::Infeasible(format!(
                            "forwarding fractions at node {i}, object {} sum to {sum}",
                            k + 1
                        )));
                    }
                }
                let r = self.rho(routing, k, i);
                if !(r >= -tol && r <= 1.0 + tol) {
                    return Err(Error::Infeasible(format!(
                        "caching variable {r} out of [0,1] at node {i}, object {}",
                        k + 1
                    )));
                }
            }
        }
        for i in 0..n {
            let used: f64 = (0..graph.object_count()).map(|k| self.rho(routing, k, i)).sum();
            if used > graph.cache_capacity(i) as f64 + tol {
                return Err(Error::Infeasible(format!(
                    "node {i} caches {used} objects, capacity {}",
                    graph.cache_capacity(i)
                )));
            }
        }
        Ok(())
    }
}

/// Marginal costs derived from a traffic snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Marginals {
    /// `D'_ij(F_ij)` per link.
    pub link_derivative: Vec<f64>,
    /// `δ_ij(k)` per hop.
    pub delta: Vec<f64>,
    /// `∂D/∂r_i(k)` per slot.
    pub dd_dr: Vec<f64>,
    /// `δ_i(k) = min_j δ_ij(k)` per slot; 0 where the FIB is empty.
    pub delta_min: Vec<f64>,
}

/// Every derived quantity of one operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluidSolution {
    /// `t_i(k)` per slot, requests/sec.
    pub traffic: Vec<f64>,
    /// `F_ij` per link, bits/sec.
    pub flows: Vec<f64>,
    /// Total cost `D`; infinite when any link is saturated.
    pub cost: f64,
    #[serde(flatten)]
    pub marginals: Marginals,
}

impl FluidSolution {
    /// `t_i(k) δ_i(k)` for a slot.
    pub fn cache_score(&self, slot: usize) -> f64 {
        weighted(self.traffic[slot], self.marginals.delta_min[slot])
    }

    pub fn cache_scores(&self) -> Vec<f64> {
        (0..self.traffic.len()).map(|s| self.cache_score(s)).collect()
    }

    pub fn is_saturated(&self) -> bool {
        self.cost.is_infinite()
    }

    /// Structured-text dump for fixtures and debugging.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("fluid solution serializes")
    }
}

/// A network, its routing, a demand and a link cost model.
#[derive(Debug, Clone, Copy)]
pub struct FluidProblem<'a> {
    pub graph: &'a NetworkGraph,
    pub routing: &'a RoutingGraph,
    pub demand: &'a Demand,
    pub cost_model: &'a dyn LinkCostModel,
    pub exec: Execution,
}

impl<'a> FluidProblem<'a> {
    pub fn new(graph: &'a NetworkGraph, routing: &'a RoutingGraph, demand: &'a Demand) -> Self {
        assert_eq!(demand.node_count(), graph.node_count(), "demand/graph mismatch");
        assert_eq!(demand.object_count(), graph.object_count(), "demand/graph mismatch");
        FluidProblem {
            graph,
            routing,
            demand,
            cost_model: &MM1,
            exec: Execution::default(),
        }
    }

    pub fn with_cost_model(mut self, model: &'a dyn LinkCostModel) -> Self {
        self.cost_model = model;
        self
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    /// Same network and routing with another demand.
    pub fn with_demand(mut self, demand: &'a Demand) -> Self {
        self.demand = demand;
        self
    }

    /// Total arrival rates `t_i(k) = r_i(k) + Σ_l t_l(k)(1-ρ_l(k))φ_li(k)`.
    ///
    /// Does not require the point to be feasible; any nonnegative values
    /// are propagated linearly.
    pub fn compute_traffic(&self, point: &ForwardingCachingPoint) -> Vec<f64> {
        let n = self.graph.node_count();
        let routing = self.routing;
        let per_object = self.exec.map_range(self.graph.object_count(), |k| {
            let mut t = self.demand.object_rates(k).to_vec();
            for &i in routing.order(k).iter().rev() {
                let out = t[i] * (1.0 - point.rho[routing.slot(k, i)]);
                if out == 0.0 {
                    continue;
                }
                let range = routing.hop_range(k, i);
                for h in range {
                    t[routing.hop_target(h)] += out * point.phi[h];
                }
            }
            t
        });
        let mut traffic = Vec::with_capacity(n * self.graph.object_count());
        per_object.into_iter().for_each(|t| traffic.extend(t));
        traffic
    }

    /// `F_ij = Σ_k L t_i(k)(1-ρ_i(k))φ_ij(k)`, summed in object order.
    pub fn compute_link_flows(&self, traffic: &[f64], point: &ForwardingCachingPoint) -> Vec<f64> {
        let l = self.graph.object_size();
        let routing = self.routing;
        self.exec.map_range(self.graph.links().len(), |link| {
            routing
                .link_hops(link)
                .iter()
                .map(|&h| {
                    let s = routing.hop_slot(h);
                    l * traffic[s] * (1.0 - point.rho[s]) * point.phi[h]
                })
                .sum()
        })
    }

    /// `D = Σ D_ij(F_ij)`, each term evaluated against the reverse-link
    /// capacity.
    pub fn total_cost(&self, flows: &[f64]) -> f64 {
        flows
            .iter()
            .enumerate()
            .map(|(id, &f)| self.cost_model.cost(f, self.graph.data_capacity(id)))
            .sum()
    }

    /// Marginal costs from the sources outward. Only the link flows enter:
    /// arrival rates scale the partial derivatives, not the marginals.
    pub fn compute_marginals(&self, point: &ForwardingCachingPoint, flows: &[f64]) -> Marginals {
        let graph = self.graph;
        let routing = self.routing;
        let n = graph.node_count();
        let l = graph.object_size();
        let link_derivative: Vec<f64> = flows
            .iter()
            .enumerate()
            .map(|(id, &f)| self.cost_model.derivative(f, graph.data_capacity(id)))
            .collect();

        let per_object = self.exec.map_range(graph.object_count(), |k| {
            let first_hop = routing.hop_range(k, 0).start;
            let last_hop = routing.hop_range(k, n - 1).end;
            let mut delta = vec![0.0; last_hop - first_hop];
            let mut dd_dr = vec![0.0; n];
            let mut delta_min = vec![0.0; n];
            for &i in routing.order(k) {
                let range = routing.hop_range(k, i);
                if range.is_empty() {
                    continue;
                }
                let mut sum = 0.0;
                let mut best = f64::INFINITY;
                for h in range {
                    let j = routing.hop_target(h);
                    let d = link_derivative[routing.hop_link(h)] + dd_dr[j] / l;
                    delta[h - first_hop] = d;
                    sum += weighted(point.phi[h], d);
                    best = best.min(d);
                }
                dd_dr[i] = weighted(1.0 - point.rho[routing.slot(k, i)], l * sum);
                delta_min[i] = best;
            }
            (delta, dd_dr, delta_min)
        });

        let mut m = Marginals {
            link_derivative,
            delta: Vec::with_capacity(routing.hop_count()),
            dd_dr: Vec::with_capacity(routing.slot_count()),
            delta_min: Vec::with_capacity(routing.slot_count()),
        };
        for (delta, dd_dr, delta_min) in per_object {
            m.delta.extend(delta);
            m.dd_dr.extend(dd_dr);
            m.delta_min.extend(delta_min);
        }
        m
    }

    pub fn evaluate(&self, point: &ForwardingCachingPoint) -> FluidSolution {
        let traffic = self.compute_traffic(point);
        let flows = self.compute_link_flows(&traffic, point);
        let cost = self.total_cost(&flows);
        let marginals = self.compute_marginals(point, &flows);
        FluidSolution {
            traffic,
            flows,
            cost,
            marginals,
        }
    }

    /// `∂D/∂φ_ij(k) = (1-ρ_i(k)) L t_i(k) δ_ij(k)` per hop.
    pub fn partial_wrt_phi(&self, point: &ForwardingCachingPoint, solution: &FluidSolution) -> Vec<f64> {
        let l = self.graph.object_size();
        (0..self.routing.hop_count())
            .map(|h| {
                let s = self.routing.hop_slot(h);
                let w = (1.0 - point.rho[s]) * l * solution.traffic[s];
                weighted(w, solution.marginals.delta[h])
            })
            .collect()
    }

    /// `∂D/∂ρ_i(k) = -L t_i(k) Σ_j φ_ij(k) δ_ij(k)` per slot.
    pub fn partial_wrt_rho(&self, point: &ForwardingCachingPoint, solution: &FluidSolution) -> Vec<f64> {
        let l = self.graph.object_size();
        (0..self.routing.slot_count())
            .map(|s| -weighted(l * solution.traffic[s], self.forwarding_average(point, solution, s)))
            .collect()
    }

    /// `Σ_j φ_ij(k) δ_ij(k)` for one slot.
    pub fn forwarding_average(
        &self,
        point: &ForwardingCachingPoint,
        solution: &FluidSolution,
        slot: usize,
    ) -> f64 {
        let n = self.graph.node_count();
        self.routing
            .hop_range(slot / n, slot % n)
            .map(|h| weighted(point.phi[h], solution.marginals.delta[h]))
            .sum()
    }
}
