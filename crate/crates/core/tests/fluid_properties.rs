mod common;

use icnsim::fluid::{link_cost, link_cost_derivative, ForwardingCachingPoint};
use icnsim::synth::{random_instance, random_interior_point, SynthConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, utilization: f64) -> (icnsim::synth::SynthInstance, ForwardingCachingPoint) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inst = random_instance(&mut rng, &SynthConfig::default());
    let point = random_interior_point(&mut rng, &inst.graph, &inst.routing);
    inst.scale_to_utilization(&point, utilization);
    (inst, point)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn link_cost_is_infinite_exactly_at_saturation(c in 0.1f64..100.0, frac in 0.0f64..2.0) {
        let f = c * frac;
        prop_assert_eq!(link_cost(f, c).is_infinite(), f >= c);
        prop_assert_eq!(link_cost_derivative(f, c).is_infinite(), f >= c);
        if f < c {
            prop_assert!(link_cost(f, c) >= 0.0);
            prop_assert!(link_cost_derivative(f, c) > 0.0);
        }
    }

    #[test]
    fn link_derivative_matches_difference_quotient(c in 0.5f64..50.0, frac in 0.01f64..0.95) {
        let f = c * frac;
        let numeric = common::richardson(|d| link_cost(f + d, c), 1e-4 * c);
        let analytic = link_cost_derivative(f, c);
        prop_assert!((numeric - analytic).abs() <= 1e-7 * analytic);
    }

    #[test]
    fn link_cost_is_increasing(c in 0.5f64..50.0, a in 0.0f64..0.99, b in 0.0f64..0.99) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-9);
        prop_assert!(link_cost(lo * c, c) < link_cost(hi * c, c));
    }

    #[test]
    fn marginals_match_finite_differences(seed in any::<u64>(), u in 0.1f64..0.8) {
        let (inst, point) = instance(seed, u);
        let problem = inst.problem();
        let sol = problem.evaluate(&point);
        let floor = 1e-9 * sol.cost.max(1.0);
        let err_r = common::max_relative_error(&sol.marginals.dd_dr, &common::fd_wrt_demand(&problem, &point), floor);
        let err_phi = common::max_relative_error(
            &problem.partial_wrt_phi(&point, &sol),
            &common::fd_wrt_phi(&problem, &point),
            floor,
        );
        let err_rho = common::max_relative_error(
            &problem.partial_wrt_rho(&point, &sol),
            &common::fd_wrt_rho(&problem, &point),
            floor,
        );
        prop_assert!(err_r <= 1e-6, "dD/dr error {}", err_r);
        prop_assert!(err_phi <= 1e-6, "dD/dphi error {}", err_phi);
        prop_assert!(err_rho <= 1e-6, "dD/drho error {}", err_rho);
    }

    #[test]
    fn traffic_conserves_requests(seed in any::<u64>()) {
        let (inst, point) = instance(seed, 0.5);
        let p = inst.problem();
        let traffic = p.compute_traffic(&point);
        let (g, r) = (&inst.graph, &inst.routing);
        // Every request either stops at a cache, at a source, or moves on.
        for k in 0..g.object_count() {
            let exogenous: f64 = (0..g.node_count()).map(|i| inst.demand.rate(i, k)).sum();
            let absorbed: f64 = (0..g.node_count())
                .map(|i| {
                    let t = traffic[r.slot(k, i)];
                    if g.is_source(i, k) { t } else { t * point.rho(r, k, i) }
                })
                .sum();
            prop_assert!((exogenous - absorbed).abs() <= 1e-9 * exogenous.max(1.0));
        }
    }

    #[test]
    fn cost_rises_with_any_loading_demand(seed in any::<u64>(), u in 0.1f64..0.9) {
        let (inst, point) = instance(seed, u);
        let base = common::cost(&inst.problem(), &point);
        for k in 0..inst.graph.object_count() {
            for i in 0..inst.graph.node_count() {
                if inst.graph.is_source(i, k) {
                    continue;
                }
                let mut d = inst.demand.clone();
                d.set_rate(i, k, d.rate(i, k) + 0.01);
                let bumped = common::cost(&inst.problem().with_demand(&d), &point);
                prop_assert!(bumped > base || bumped.is_infinite());
            }
        }
    }
}

#[test]
fn saturated_instance_reports_infinite_cost() {
    let (mut inst, point) = instance(5, 0.5);
    inst.scale_to_utilization(&point, 1.0);
    let sol = inst.problem().evaluate(&point);
    assert!(sol.is_saturated());
    assert!(sol.marginals.link_derivative.iter().any(|d| d.is_infinite()));
}

#[test]
fn zero_demand_costs_nothing() {
    let (mut inst, point) = instance(6, 0.5);
    inst.demand = inst.demand.scaled(0.0);
    let sol = inst.problem().evaluate(&point);
    assert_eq!(sol.cost, 0.0);
    assert!(sol.traffic.iter().all(|&t| t == 0.0));
}

#[test]
fn solution_dump_parses_back() {
    let (inst, point) = instance(7, 0.4);
    let text = inst.problem().evaluate(&point).to_toml();
    let table: toml::Table = text.parse().unwrap();
    assert!(table.contains_key("cost"));
    assert!(table.contains_key("delta"));
}
