//! MinDelay joint forwarding and caching.
//!
//! The offline form iterates a modified conditional-gradient method on the
//! fluid model. Each step solves two linear direction subproblems: every
//! `(i,k)` moves its forwarding toward the next hop of least marginal cost
//! `δ_ij(k)`, and every node moves its cache toward the `c_i` objects with
//! the largest `ω_i(k) = t_i(k) Σ_j φ_ij(k) δ_ij(k)`. Using `δ` instead of
//! the true gradient `(1-ρ) L t δ` keeps the forwarding direction
//! meaningful where `t_i(k)(1-ρ_i(k)) = 0`.
//!
//! With stepsize 1 every iterate is integral: one-hot forwarding and a
//! 0/1 cache. [`online`] holds the per-packet form used by the simulator.

pub mod online;

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fluid::{
    check_modified_conditions, default_tolerance, weighted, FluidProblem, FluidSolution,
    ForwardingCachingPoint,
};
use crate::topology::{NetworkGraph, RoutingGraph};

/// Index of the smallest value; the first wins ties.
///
/// Next hops are stored in ascending node id, so the first index is the
/// lowest id.
pub fn argmin_index(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (idx, &v) in values.iter().enumerate() {
        if !v.is_nan() && best.is_none_or(|b| v < values[b]) {
            best = Some(idx);
        }
    }
    best.or((!values.is_empty()).then_some(0))
}

/// Vertex of the forwarding simplex minimizing `Σ_j φ_ij(k) δ_ij(k)` for
/// every `(i,k)`, as flat per-hop fractions.
pub fn solve_forwarding_direction(
    graph: &NetworkGraph,
    routing: &RoutingGraph,
    delta: &[f64],
) -> Result<Vec<f64>> {
    let mut phi_bar = vec![0.0; routing.hop_count()];
    for k in 0..routing.object_count() {
        for i in 0..routing.node_count() {
            let range = routing.hop_range(k, i);
            if range.is_empty() {
                if !graph.is_source(i, k) {
                    return Err(Error::config(format!(
                        "node {} has no next hop for object {}",
                        graph.node_name(i),
                        k + 1
                    )));
                }
                continue;
            }
            let best = argmin_index(&delta[range.clone()]).expect("nonempty range");
            phi_bar[range.start + best] = 1.0;
        }
    }
    Ok(phi_bar)
}

/// `ρ̄ = 1` for the `capacity` largest `omega`, lowest object id first
/// among equals.
pub fn solve_caching_direction(omega: &[f64], capacity: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..omega.len()).collect();
    order.sort_by(|&a, &b| omega[b].total_cmp(&omega[a]).then(a.cmp(&b)));
    let mut rho_bar = vec![0.0; omega.len()];
    for &k in order.iter().take(capacity) {
        rho_bar[k] = 1.0;
    }
    rho_bar
}

/// The vertex `Φ̄` returned by the two direction subproblems.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSolution {
    pub phi_bar: Vec<f64>,
    pub rho_bar: Vec<f64>,
}

/// `ω_i(k) = t_i(k) Σ_j φ_ij(k) δ_ij(k)` per slot.
pub fn caching_weights(
    problem: &FluidProblem<'_>,
    point: &ForwardingCachingPoint,
    solution: &FluidSolution,
) -> Vec<f64> {
    (0..problem.routing.slot_count())
        .map(|s| weighted(solution.traffic[s], problem.forwarding_average(point, solution, s)))
        .collect()
}

pub fn solve_direction(
    problem: &FluidProblem<'_>,
    point: &ForwardingCachingPoint,
    solution: &FluidSolution,
) -> Result<DirectionSolution> {
    let graph = problem.graph;
    let routing = problem.routing;
    let phi_bar = solve_forwarding_direction(graph, routing, &solution.marginals.delta)?;
    let omega = caching_weights(problem, point, solution);
    let n = graph.node_count();
    let k_count = graph.object_count();
    let mut rho_bar = vec![0.0; routing.slot_count()];
    let per_node = problem.exec.map_range(n, |i| {
        let w: Vec<f64> = (0..k_count).map(|k| omega[routing.slot(k, i)]).collect();
        solve_caching_direction(&w, graph.cache_capacity(i))
    });
    for (i, column) in per_node.into_iter().enumerate() {
        for (k, v) in column.into_iter().enumerate() {
            rho_bar[routing.slot(k, i)] = v;
        }
    }
    Ok(DirectionSolution { phi_bar, rho_bar })
}

/// `Φ + a (Φ̄ - Φ)`, componentwise. `a = 1` copies `Φ̄` exactly.
pub fn combine(point: &ForwardingCachingPoint, dir: &DirectionSolution, a: f64) -> ForwardingCachingPoint {
    let mix = |x: &[f64], y: &[f64]| -> Vec<f64> {
        if a == 1.0 {
            y.to_vec()
        } else {
            x.iter().zip(y).map(|(&x, &y)| x + a * (y - x)).collect()
        }
    };
    ForwardingCachingPoint {
        phi: mix(&point.phi, &dir.phi_bar),
        rho: mix(&point.rho, &dir.rho_bar),
    }
}

const FEASIBILITY_TOL: f64 = 1e-9;

fn check_stepsize(a: f64) -> Result<()> {
    if a > 0.0 && a <= 1.0 {
        Ok(())
    } else {
        Err(Error::Infeasible(format!("stepsize {a} outside (0, 1]")))
    }
}

/// One conditional-gradient step from a feasible point.
pub fn frank_wolfe_step(
    problem: &FluidProblem<'_>,
    point: &ForwardingCachingPoint,
    a: f64,
) -> Result<ForwardingCachingPoint> {
    check_stepsize(a)?;
    point.validate(problem.graph, problem.routing, FEASIBILITY_TOL)?;
    let solution = problem.evaluate(point);
    let dir = solve_direction(problem, point, &solution)?;
    Ok(combine(point, &dir, a))
}

/// Stepsize rule `a_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    Constant(f64),
    /// `a_n = 2 / (n + 2)`.
    Diminishing,
}

impl Schedule {
    pub fn stepsize(self, n: usize) -> f64 {
        match self {
            Schedule::Constant(a) => a,
            Schedule::Diminishing => 2.0 / (n as f64 + 2.0),
        }
    }
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Constant(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub max_steps: usize,
    pub schedule: Schedule,
    /// Condition tolerance; [`default_tolerance`] of each iterate's cost
    /// when unset.
    pub tolerance: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_steps: 100,
            schedule: Schedule::default(),
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The modified conditions hold at the final iterate.
    Converged,
    /// A step returned the same point without satisfying the conditions.
    FixedPoint,
    /// A constant-stepsize run revisited an earlier iterate.
    Cycle { first_seen: usize },
    StepLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateRecord {
    pub iteration: usize,
    pub cost: f64,
    pub violations: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<IterateRecord>,
    pub final_point: ForwardingCachingPoint,
    pub best_point: ForwardingCachingPoint,
    pub best_cost: f64,
    pub stop: StopReason,
}

impl Trajectory {
    pub fn final_cost(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.cost)
    }

    /// `iteration,cost,violations` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,cost,violations\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{}", r.iteration, r.cost, r.violations);
        }
        out
    }
}

fn point_key(point: &ForwardingCachingPoint) -> Vec<u64> {
    point.phi.iter().chain(&point.rho).map(|x| x.to_bits()).collect()
}

/// Iterates [`frank_wolfe_step`] from `init` until the modified conditions
/// hold, the point stops moving, a constant-stepsize run cycles, or
/// `max_steps` steps were taken. Saturated iterates are recorded with an
/// infinite cost.
pub fn run_fluid_mindelay(
    problem: &FluidProblem<'_>,
    init: ForwardingCachingPoint,
    options: &RunOptions,
) -> Result<Trajectory> {
    init.validate(problem.graph, problem.routing, FEASIBILITY_TOL)?;
    let constant = matches!(options.schedule, Schedule::Constant(_));
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut records = Vec::new();
    let mut point = init;
    let mut best: Option<(f64, ForwardingCachingPoint)> = None;

    for n in 0.. {
        let solution = problem.evaluate(&point);
        let tol = options.tolerance.unwrap_or_else(|| default_tolerance(solution.cost));
        let report = check_modified_conditions(problem, &point, &solution, tol);
        records.push(IterateRecord {
            iteration: n,
            cost: solution.cost,
            violations: report.violation_count(),
        });
        if best.as_ref().is_none_or(|(c, _)| solution.cost < *c) {
            best = Some((solution.cost, point.clone()));
        }

        let stop = if report.is_clean() {
            Some(StopReason::Converged)
        } else if n >= options.max_steps {
            Some(StopReason::StepLimit)
        } else {
            None
        };
        if let Some(stop) = stop {
            return Ok(finish(records, point, best, stop));
        }

        if constant {
            seen.insert(point_key(&point), n);
        }
        let a = options.schedule.stepsize(n);
        check_stepsize(a)?;
        let dir = solve_direction(problem, &point, &solution)?;
        let next = combine(&point, &dir, a);
        if next == point {
            return Ok(finish(records, point, best, StopReason::FixedPoint));
        }
        if constant {
            if let Some(&first_seen) = seen.get(&point_key(&next)) {
                let stop = StopReason::Cycle { first_seen };
                return Ok(finish(records, point, best, stop));
            }
        }
        point = next;
    }
    unreachable!("loop exits through a stop reason")
}

fn finish(
    records: Vec<IterateRecord>,
    point: ForwardingCachingPoint,
    best: Option<(f64, ForwardingCachingPoint)>,
    stop: StopReason,
) -> Trajectory {
    let (best_cost, best_point) = best.expect("at least one iterate");
    Trajectory {
        records,
        final_point: point,
        best_point,
        best_cost,
        stop,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{Demand, FibRule};

    #[test]
    fn forwarding_argmin_and_ties() {
        assert_eq!(argmin_index(&[3.0, 1.5, 2.2]), Some(1));
        assert_eq!(argmin_index(&[1.0, 1.0]), Some(0));
        assert_eq!(argmin_index(&[7.0]), Some(0));
        assert_eq!(argmin_index(&[f64::INFINITY, 2.0]), Some(1));
        assert_eq!(argmin_index(&[f64::INFINITY, f64::INFINITY]), Some(0));
        assert_eq!(argmin_index(&[]), None);
    }

    #[test]
    fn caching_top_c() {
        assert_eq!(solve_caching_direction(&[5.0, 3.0, 1.0], 1), vec![1.0, 0.0, 0.0]);
        assert_eq!(solve_caching_direction(&[5.0, 3.0, 1.0], 0), vec![0.0; 3]);
        assert_eq!(solve_caching_direction(&[5.0, 3.0, 1.0], 7), vec![1.0; 3]);
        assert_eq!(solve_caching_direction(&[2.0, 4.0, 4.0], 1), vec![0.0, 1.0, 0.0]);
    }

    fn diamond() -> (NetworkGraph, RoutingGraph) {
        let mut b = NetworkGraph::builder();
        b.nodes(["a", "b", "c", "d"]);
        b.duplex(0, 1, 10.0).duplex(0, 2, 10.0).duplex(1, 3, 10.0).duplex(2, 3, 10.0);
        b.object_size(1.0).sources(vec![vec![3]]);
        let g = b.build().unwrap();
        let r = RoutingGraph::build(&g, FibRule::StrictlyCloser).unwrap();
        (g, r)
    }

    #[test]
    fn half_step_is_midpoint() {
        let (g, r) = diamond();
        let mut d = Demand::zeros(4, 1);
        d.set_rate(0, 0, 1.0);
        let p = FluidProblem::new(&g, &r, &d);
        let mut pt = ForwardingCachingPoint::uniform(&r);
        // Send everything via c (node 2); the empty path via b is cheaper.
        pt.route(&r, 0, 0, 2);
        let next = frank_wolfe_step(&p, &pt, 0.5).unwrap();
        assert_eq!(next.phi(&r, 0, 0), &[0.5, 0.5]);
    }

    #[test]
    fn unit_step_returns_direction_vertex() {
        let (g, r) = diamond();
        let mut d = Demand::zeros(4, 1);
        d.set_rate(0, 0, 1.0);
        let p = FluidProblem::new(&g, &r, &d);
        let mut pt = ForwardingCachingPoint::uniform(&r);
        pt.route(&r, 0, 0, 2);
        let sol = p.evaluate(&pt);
        let dir = solve_direction(&p, &pt, &sol).unwrap();
        let next = frank_wolfe_step(&p, &pt, 1.0).unwrap();
        assert_eq!(next.phi, dir.phi_bar);
        assert_eq!(next.rho, dir.rho_bar);
    }

    #[test]
    fn fixed_point_is_preserved_for_any_stepsize() {
        let mut b = NetworkGraph::builder();
        b.nodes(["a", "b", "c", "d"]);
        b.duplex(0, 1, 100.0).duplex(0, 2, 1.0).duplex(1, 3, 100.0).duplex(2, 3, 1.0);
        b.object_size(1.0).sources(vec![vec![3]]);
        let g = b.build().unwrap();
        let r = RoutingGraph::build(&g, FibRule::StrictlyCloser).unwrap();
        let mut d = Demand::zeros(4, 1);
        d.set_rate(0, 0, 1.0);
        let p = FluidProblem::new(&g, &r, &d);
        let mut pt = ForwardingCachingPoint::uniform(&r);
        pt.route(&r, 0, 0, 1);
        for a in [0.1, 0.5, 1.0] {
            assert_eq!(frank_wolfe_step(&p, &pt, a).unwrap(), pt);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let (g, r) = diamond();
        let d = Demand::zeros(4, 1);
        let p = FluidProblem::new(&g, &r, &d);
        let pt = ForwardingCachingPoint::uniform(&r);
        assert!(frank_wolfe_step(&p, &pt, 0.0).is_err());
        assert!(frank_wolfe_step(&p, &pt, 1.5).is_err());
        let mut bad = pt.clone();
        bad.phi[0] = 0.9;
        assert!(frank_wolfe_step(&p, &bad, 0.5).is_err());
    }

    #[test]
    fn zero_demand_is_converged_at_once() {
        let (g, r) = diamond();
        let d = Demand::zeros(4, 1);
        let p = FluidProblem::new(&g, &r, &d);
        let traj = run_fluid_mindelay(&p, ForwardingCachingPoint::uniform(&r), &RunOptions::default())
            .unwrap();
        assert_eq!(traj.records.len(), 1);
        assert_eq!(traj.final_cost(), 0.0);
    }

    #[test]
    fn trajectory_csv_has_header() {
        let (g, r) = diamond();
        let mut d = Demand::zeros(4, 1);
        d.set_rate(0, 0, 1.0);
        let p = FluidProblem::new(&g, &r, &d);
        let traj = run_fluid_mindelay(&p, ForwardingCachingPoint::uniform(&r), &RunOptions::default())
            .unwrap();
        let csv = traj.to_csv();
        assert!(csv.starts_with("iteration,cost,violations\n0,"));
        assert_eq!(csv.lines().count(), traj.records.len() + 1);
    }
}
