//! Independent oracles shared by the integration and acceptance tests.
//!
//! Nothing here calls the marginal-cost or direction-finding code under
//! test: derivatives come from finite differences of the total cost, and
//! optima come from enumeration.

#![allow(dead_code)]

use std::path::PathBuf;

use icnsim::fluid::{parse_point, FluidProblem, ForwardingCachingPoint};
use icnsim::topology::{load_topology, Demand, Instance, NetworkGraph, RoutingGraph};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub struct Triangle {
    pub instance: Instance,
    pub routing: RoutingGraph,
    pub demand: Demand,
}

impl Triangle {
    pub fn load() -> Self {
        let instance = load_topology(fixture("triangle.toml")).expect("triangle fixture");
        let routing = instance.routing().unwrap();
        let demand = instance.demand().unwrap();
        Triangle {
            instance,
            routing,
            demand,
        }
    }

    pub fn problem(&self) -> FluidProblem<'_> {
        FluidProblem::new(&self.instance.graph, &self.routing, &self.demand)
    }

    pub fn point(&self, file: &str) -> ForwardingCachingPoint {
        let text = std::fs::read_to_string(fixture(file)).unwrap();
        parse_point(&text, &self.instance.graph, &self.routing).unwrap()
    }
}

/// Total cost only, without marginals.
pub fn cost(problem: &FluidProblem<'_>, point: &ForwardingCachingPoint) -> f64 {
    let traffic = problem.compute_traffic(point);
    let flows = problem.compute_link_flows(&traffic, point);
    problem.total_cost(&flows)
}

/// Central difference of `f` at step `h`, refined by one Richardson step
/// (error `O(h^4)`).
pub fn richardson<F: Fn(f64) -> f64>(f: F, h: f64) -> f64 {
    let central = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    (4.0 * central(h / 2.0) - central(h)) / 3.0
}

/// Three-point forward difference refined by one Richardson step (error
/// `O(h^3)`), for variables sitting at a lower bound of 0.
pub fn forward_richardson<F: Fn(f64) -> f64>(f: F, h: f64) -> f64 {
    let f0 = f(0.0);
    let forward = |h: f64| (4.0 * (f(h) - f0) - (f(2.0 * h) - f0)) / (2.0 * h);
    (4.0 * forward(h / 2.0) - forward(h)) / 3.0
}

const FD_STEP: f64 = 1e-3;

/// `∂D/∂r_i(k)` for every slot by finite differences.
pub fn fd_wrt_demand(problem: &FluidProblem<'_>, point: &ForwardingCachingPoint) -> Vec<f64> {
    let routing = problem.routing;
    let mut out = vec![0.0; routing.slot_count()];
    for k in 0..routing.object_count() {
        for i in 0..routing.node_count() {
            let base = problem.demand.rate(i, k);
            let h = FD_STEP * base.max(0.1);
            let f = |d: f64| {
                let mut demand = problem.demand.clone();
                demand.set_rate(i, k, base + d);
                cost(&problem.with_demand(&demand), point)
            };
            out[routing.slot(k, i)] = if base > h {
                richardson(f, h)
            } else {
                forward_richardson(f, h)
            };
        }
    }
    out
}

/// `∂D/∂φ_ij(k)` for every hop, perturbing one fraction at a time.
pub fn fd_wrt_phi(problem: &FluidProblem<'_>, point: &ForwardingCachingPoint) -> Vec<f64> {
    (0..point.phi.len())
        .map(|h| {
            let f = |d: f64| {
                let mut p = point.clone();
                p.phi[h] += d;
                cost(problem, &p)
            };
            if point.phi[h] > FD_STEP {
                richardson(f, FD_STEP)
            } else {
                forward_richardson(f, FD_STEP)
            }
        })
        .collect()
}

/// `∂D/∂ρ_i(k)` for every slot. Raising `ρ` only removes traffic, so a
/// central difference is safe below `ρ = 1`.
pub fn fd_wrt_rho(problem: &FluidProblem<'_>, point: &ForwardingCachingPoint) -> Vec<f64> {
    (0..point.rho.len())
        .map(|s| {
            richardson(
                |d| {
                    let mut p = point.clone();
                    p.rho[s] += d;
                    cost(problem, &p)
                },
                FD_STEP,
            )
        })
        .collect()
}

/// Largest relative error between two gradient vectors; components whose
/// magnitudes are both below `floor` are compared absolutely.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// All compositions of `total` into `parts` nonnegative integers.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All subsets of `0..n` with at most `max` elements, as sorted index lists.
pub fn subsets_up_to(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize <= max {
            out.push((0..n).filter(|&k| mask & (1 << k) != 0).collect());
        }
    }
    out
}

/// Number of points [`brute_force_optimum`] would evaluate.
pub fn grid_size(graph: &NetworkGraph, routing: &RoutingGraph, steps: usize) -> f64 {
    let mut size = 1.0;
    for k in 0..graph.object_count() {
        for i in 0..graph.node_count() {
            let m = routing.next_hops(k, i).len();
            if m > 1 {
                size *= compositions(steps, m).len() as f64;
            }
        }
    }
    for i in 0..graph.node_count() {
        size *= subsets_up_to(graph.object_count(), graph.cache_capacity(i)).len() as f64;
    }
    size
}

/// Minimum cost over integer caching and forwarding fractions on the grid
/// `{0, 1/steps, ..., 1}`, by exhaustive enumeration.
pub fn brute_force_optimum(problem: &FluidProblem<'_>, steps: usize) -> (f64, ForwardingCachingPoint) {
    let graph = problem.graph;
    let routing = problem.routing;
    let k_count = graph.object_count();

    let mut forwarding_axes: Vec<(std::ops::Range<usize>, Vec<Vec<usize>>)> = Vec::new();
    for k in 0..k_count {
        for i in 0..graph.node_count() {
            let range = routing.hop_range(k, i);
            if !range.is_empty() {
                forwarding_axes.push((range.clone(), compositions(steps, range.len())));
            }
        }
    }
    let caching_axes: Vec<Vec<Vec<usize>>> = (0..graph.node_count())
        .map(|i| subsets_up_to(k_count, graph.cache_capacity(i)))
        .collect();

    let mut point = ForwardingCachingPoint::uniform(routing);
    let mut best = (f64::INFINITY, point.clone());
    let mut f_idx = vec![0usize; forwarding_axes.len()];
    loop {
        for (axis, &choice) in forwarding_axes.iter().zip(&f_idx) {
            let (range, options) = axis;
            for (p, &units) in point.phi[range.clone()].iter_mut().zip(&options[choice]) {
                *p = units as f64 / steps as f64;
            }
        }
        let mut c_idx = vec![0usize; caching_axes.len()];
        loop {
            point.rho.iter_mut().for_each(|r| *r = 0.0);
            for (i, (options, &choice)) in caching_axes.iter().zip(&c_idx).enumerate() {
                for &k in &options[choice] {
                    point.set_rho(routing, k, i, 1.0);
                }
            }
            let c = cost(problem, &point);
            if c < best.0 {
                best = (c, point.clone());
            }
            if !advance(&mut c_idx, |a| caching_axes[a].len()) {
                break;
            }
        }
        if !advance(&mut f_idx, |a| forwarding_axes[a].1.len()) {
            break;
        }
    }
    best
}

/// Odometer increment; false once every digit has wrapped.
fn advance(idx: &mut [usize], len: impl Fn(usize) -> usize) -> bool {
    for a in 0..idx.len() {
        idx[a] += 1;
        if idx[a] < len(a) {
            return true;
        }
        idx[a] = 0;
    }
    false
}

/// Minimum of `Σ_j φ̄_j δ_j` over the vertices of the simplex.
pub fn best_forwarding_vertex(delta: &[f64]) -> f64 {
    (0..delta.len())
        .map(|v| {
            (0..delta.len())
                .map(|j| if j == v { delta[j] } else { 0.0 })
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// `Σ ω` over a subset, added largest first so that equal multisets give
/// bit-identical sums.
pub fn canonical_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v.into_iter().sum()
}

/// Maximum of `Σ_{k∈S} ω_k` over subsets with `|S| <= capacity`.
pub fn best_caching_subset(omega: &[f64], capacity: usize) -> f64 {
    subsets_up_to(omega.len(), capacity)
        .into_iter()
        .map(|s| canonical_sum(s.into_iter().map(|k| omega[k])))
        .fold(f64::NEG_INFINITY, f64::max)
}
