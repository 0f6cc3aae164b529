//! Optimality-condition checks for the relaxed joint forwarding and caching
//! problem.
//!
//! The modified conditions are checked on marginal costs directly:
//!
//! * forwarding: every hop carrying traffic (`φ_ij(k) > 0`) has the minimal
//!   marginal cost `δ_i(k)`;
//! * caching: with `μ_i` the `c_i`-th largest cache score `t_i(k) δ_i(k)`
//!   when the cache is full and 0 when it has room, cached objects score
//!   at least `μ_i`, uncached objects at most `μ_i` and fractional ones
//!   exactly `μ_i`.
//!
//! The raw Lagrangian conditions on `∂D/∂φ` and `∂D/∂ρ` (with complementary
//! slackness on the cache constraint) are evaluated alongside for
//! diagnostics. They are vacuous wherever `t_i(k)(1-ρ_i(k)) = 0`, which is
//! exactly where the two sets can disagree; such nodes are listed in
//! [`ConditionReport::disagreements`].

use std::fmt::Write as _;

use super::{FluidProblem, FluidSolution, ForwardingCachingPoint};
use crate::topology::{NetworkGraph, NodeId, ObjectId};

const ZERO: f64 = 1e-12;

/// `1e-9 · (1 + |D|)`, or `1e-9` at a saturated point.
pub fn default_tolerance(cost: f64) -> f64 {
    if cost.is_finite() {
        1e-9 * (1.0 + cost.abs())
    } else {
        1e-9
    }
}

/// `a > b` beyond the relative tolerance `tol`.
fn exceeds(a: f64, b: f64, tol: f64) -> bool {
    if a == b || b == f64::INFINITY {
        return false;
    }
    if a == f64::INFINITY {
        return true;
    }
    a - b > tol * a.abs().max(b.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardingViolation {
    pub node: NodeId,
    pub object: ObjectId,
    pub next_hop: NodeId,
    pub phi: f64,
    pub delta: f64,
    pub delta_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CachingViolation {
    pub node: NodeId,
    pub object: ObjectId,
    pub rho: f64,
    pub score: f64,
    pub multiplier: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawForwardingViolation {
    pub node: NodeId,
    pub object: ObjectId,
    pub next_hop: NodeId,
    pub phi: f64,
    pub partial: f64,
    pub multiplier: f64,
}

/// Feasible interval of the cache multiplier `μ_i` under the raw caching
/// conditions and complementary slackness.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCachingCheck {
    pub node: NodeId,
    pub multiplier_low: f64,
    pub multiplier_high: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub tolerance: f64,
    pub forwarding: Vec<ForwardingViolation>,
    pub caching: Vec<CachingViolation>,
    /// `μ_i` used for the modified caching condition.
    pub multipliers: Vec<f64>,
    pub raw_forwarding: Vec<RawForwardingViolation>,
    pub raw_caching: Vec<RawCachingCheck>,
    /// Nodes where the raw and modified caching verdicts differ.
    pub disagreements: Vec<NodeId>,
}

impl ConditionReport {
    /// No violation of the modified conditions.
    pub fn is_clean(&self) -> bool {
        self.forwarding.is_empty() && self.caching.is_empty()
    }

    pub fn violation_count(&self) -> usize {
        self.forwarding.len() + self.caching.len()
    }

    /// The raw necessary conditions hold everywhere.
    pub fn raw_satisfied(&self) -> bool {
        self.raw_forwarding.is_empty() && self.raw_caching.iter().all(|c| c.satisfied)
    }

    /// Human-readable listing with node names and 1-based object ids.
    pub fn render(&self, graph: &NetworkGraph) -> String {
        let name = |i: NodeId| graph.node_name(i);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "modified conditions: {} ({} forwarding, {} caching violations; tol {:e})",
            if self.is_clean() { "satisfied" } else { "VIOLATED" },
            self.forwarding.len(),
            self.caching.len(),
            self.tolerance
        );
        for v in &self.forwarding {
            let _ = writeln!(
                out,
                "  forwarding node={} object={} next_hop={} phi={} delta={:e} delta_min={:e}",
                name(v.node),
                v.object + 1,
                name(v.next_hop),
                v.phi,
                v.delta,
                v.delta_min
            );
        }
        for v in &self.caching {
            let _ = writeln!(
                out,
                "  caching node={} object={} rho={} score={:e} mu={:e}",
                name(v.node),
                v.object + 1,
                v.rho,
                v.score,
                v.multiplier
            );
        }
        let _ = writeln!(
            out,
            "raw necessary conditions: {}",
            if self.raw_satisfied() { "satisfied" } else { "VIOLATED" }
        );
        for v in &self.raw_forwarding {
            let _ = writeln!(
                out,
                "  raw-forwarding node={} object={} next_hop={} phi={} partial={:e} lambda={:e}",
                name(v.node),
                v.object + 1,
                name(v.next_hop),
                v.phi,
                v.partial,
                v.multiplier
            );
        }
        for c in self.raw_caching.iter().filter(|c| !c.satisfied) {
            let _ = writeln!(
                out,
                "  raw-caching node={} mu_interval=[{:e}, {:e}] empty",
                name(c.node),
                c.multiplier_low,
                c.multiplier_high
            );
        }
        for &i in &self.disagreements {
            let _ = writeln!(out, "  disagreement node={}: raw and modified caching verdicts differ", name(i));
        }
        out
    }
}

/// Checks the modified and raw optimality conditions at `point`.
///
/// `solution` must be `problem.evaluate(point)`. `tol` is relative to the
/// magnitudes being compared; see [`default_tolerance`].
pub fn check_modified_conditions(
    problem: &FluidProblem<'_>,
    point: &ForwardingCachingPoint,
    solution: &FluidSolution,
    tol: f64,
) -> ConditionReport {
    let graph = problem.graph;
    let routing = problem.routing;
    let n = graph.node_count();
    let k_count = graph.object_count();
    let m = &solution.marginals;

    let mut forwarding = Vec::new();
    let mut raw_forwarding = Vec::new();
    let dphi = problem.partial_wrt_phi(point, solution);
    for k in 0..k_count {
        for i in 0..n {
            let range = routing.hop_range(k, i);
            if range.is_empty() {
                continue;
            }
            let slot = routing.slot(k, i);
            let lambda = range.clone().map(|h| dphi[h]).fold(f64::INFINITY, f64::min);
            for h in range {
                let phi = point.phi[h];
                if phi <= ZERO {
                    continue;
                }
                if exceeds(m.delta[h], m.delta_min[slot], tol) {
                    forwarding.push(ForwardingViolation {
                        node: i,
                        object: k,
                        next_hop: routing.hop_target(h),
                        phi,
                        delta: m.delta[h],
                        delta_min: m.delta_min[slot],
                    });
                }
                if exceeds(dphi[h], lambda, tol) {
                    raw_forwarding.push(RawForwardingViolation {
                        node: i,
                        object: k,
                        next_hop: routing.hop_target(h),
                        phi,
                        partial: dphi[h],
                        multiplier: lambda,
                    });
                }
            }
        }
    }

    let scores = solution.cache_scores();
    let drho = problem.partial_wrt_rho(point, solution);
    let mut caching = Vec::new();
    let mut multipliers = Vec::with_capacity(n);
    let mut raw_caching = Vec::with_capacity(n);
    let mut disagreements = Vec::new();
    for i in 0..n {
        let capacity = graph.cache_capacity(i);
        let node_scores: Vec<f64> = (0..k_count).map(|k| scores[routing.slot(k, i)]).collect();
        let occupied: f64 = (0..k_count).map(|k| point.rho[routing.slot(k, i)]).sum();
        let mu = if capacity == 0 {
            f64::INFINITY
        } else if capacity >= k_count || occupied < capacity as f64 - 1e-9 {
            // A slack cache constraint forces μ_i = 0.
            0.0
        } else {
            let mut sorted = node_scores.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            sorted[capacity - 1]
        };
        multipliers.push(mu);

        let before = caching.len();
        let (mut low, mut high) = (0.0f64, f64::INFINITY);
        for (k, &score) in node_scores.iter().enumerate() {
            let rho = point.rho[routing.slot(k, i)];
            let value = -drho[routing.slot(k, i)];
            let violated = if rho >= 1.0 - ZERO {
                high = high.min(value);
                exceeds(mu, score, tol)
            } else if rho <= ZERO {
                low = low.max(value);
                exceeds(score, mu, tol)
            } else {
                low = low.max(value);
                high = high.min(value);
                exceeds(score, mu, tol) || exceeds(mu, score, tol)
            };
            if violated {
                caching.push(CachingViolation {
                    node: i,
                    object: k,
                    rho,
                    score,
                    multiplier: mu,
                });
            }
        }
        if occupied < capacity as f64 - 1e-9 {
            high = high.min(0.0);
        }
        let satisfied = !exceeds(low, high, tol);
        raw_caching.push(RawCachingCheck {
            node: i,
            multiplier_low: low,
            multiplier_high: high,
            satisfied,
        });
        let modified_ok = caching.len() == before;
        if satisfied != modified_ok {
            disagreements.push(i);
        }
    }

    ConditionReport {
        tolerance: tol,
        forwarding,
        caching,
        multipliers,
        raw_forwarding,
        raw_caching,
        disagreements,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exceeds_handles_infinities() {
        let inf = f64::INFINITY;
        assert!(!exceeds(inf, inf, 1e-9));
        assert!(exceeds(inf, 1.0, 1e-9));
        assert!(!exceeds(1.0, inf, 1e-9));
        assert!(!exceeds(1.0 + 1e-12, 1.0, 1e-9));
        assert!(exceeds(1.0 + 1e-6, 1.0, 1e-9));
    }

    #[test]
    fn empty_cache_with_room_is_not_optimal() {
        use crate::topology::{Demand, FibRule, RoutingGraph};
        let mut b = NetworkGraph::builder();
        b.nodes(["1", "2"]);
        b.duplex(0, 1, 10.0);
        b.object_size(1.0).sources(vec![vec![1], vec![1]]).cache(0, 1);
        let g = b.build().unwrap();
        let r = RoutingGraph::build(&g, FibRule::StrictlyCloser).unwrap();
        let mut d = Demand::zeros(2, 2);
        d.set_rate(0, 0, 1.0);
        let problem = FluidProblem::new(&g, &r, &d);

        let empty = ForwardingCachingPoint::uniform(&r);
        let sol = problem.evaluate(&empty);
        let report = check_modified_conditions(&problem, &empty, &sol, 1e-9);
        assert_eq!(report.multipliers[0], 0.0);
        assert_eq!(report.caching.len(), 1);
        assert!(!report.raw_satisfied());

        let mut full = empty.clone();
        full.set_rho(&r, 0, 0, 1.0);
        let sol = problem.evaluate(&full);
        assert!(check_modified_conditions(&problem, &full, &sol, 1e-9).is_clean());
    }
}
