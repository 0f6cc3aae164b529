//! Sequential against data-parallel execution of the fluid evaluation, one
//! conditional-gradient step and a small experiment grid.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use icnsim::experiments::{resolve_instance, run_plan, ExperimentPlan, InstanceOptions};
use icnsim::fluid::{FluidProblem, ForwardingCachingPoint};
use icnsim::mindelay::frank_wolfe_step;
use icnsim::sim::StrategyKind;
use icnsim::topology::Preset;
use icnsim::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn fluid(c: &mut Criterion) {
    let opts = InstanceOptions {
        objects: Some(500),
        ..InstanceOptions::default()
    };
    let inst = resolve_instance("dtelekom", &opts).unwrap();
    let routing = inst.routing().unwrap();
    let demand = inst.demand.with_rate(0.5).materialize(&inst.graph).unwrap();
    let point = ForwardingCachingPoint::uniform(&routing);

    let mut group = c.benchmark_group("fluid_dtelekom_500_objects");
    for (name, exec) in MODES {
        let problem = FluidProblem::new(&inst.graph, &routing, &demand).with_execution(exec);
        group.bench_function(BenchmarkId::new("evaluate", name), |b| {
            b.iter(|| black_box(problem.evaluate(&point)))
        });
        group.bench_function(BenchmarkId::new("step", name), |b| {
            b.iter(|| black_box(frank_wolfe_step(&problem, &point, 0.5).unwrap()))
        });
    }
    group.finish();
}

fn experiment_grid(c: &mut Criterion) {
    let mut plan = ExperimentPlan::new(
        vec!["tree".into(), "ladder".into()],
        vec![StrategyKind::MinDelay, StrategyKind::LfumPi],
        vec![1.0],
        Preset::Desk,
    );
    plan.seeds = (0..4).collect();
    plan.horizon = 10.0;

    let mut group = c.benchmark_group("experiment_grid_16_cells");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| black_box(run_plan(&plan, exec).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, fluid, experiment_grid);
criterion_main!(benches);
