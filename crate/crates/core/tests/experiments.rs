use icnsim::experiments::{
    cache_hit_rate, run_plan, total_delay, ExperimentPlan, InstanceOptions, Scenario, RUNS_HEADER,
};
use icnsim::sim::{MetricsLog, RequestRecord, StrategyKind};
use icnsim::topology::Preset;
use icnsim::Execution;

fn tiny_plan(seeds: Vec<u64>) -> ExperimentPlan {
    let mut plan = ExperimentPlan::new(
        vec!["tree".into()],
        vec![StrategyKind::MinDelay],
        vec![1.5],
        Preset::Desk,
    );
    plan.seeds = seeds;
    plan.horizon = 5.0;
    plan.instance = InstanceOptions {
        objects: Some(20),
        ..InstanceOptions::default()
    };
    plan
}

fn log_with(delays: &[f64], hits: usize) -> MetricsLog {
    let mut log = MetricsLog::empty(10.0, (0..10).map(|i| i.to_string()).collect());
    for &d in delays {
        log.requests.push(RequestRecord {
            creation: 0.0,
            fulfill: d,
            object: 0,
            requester: 0,
        });
    }
    log.generated = delays.len();
    log.hits = vec![
        icnsim::sim::HitRecord {
            time: 1.0,
            node: 1,
            object: 0
        };
        hits
    ];
    log
}

#[test]
fn total_delay_examples() {
    assert_eq!(total_delay(&log_with(&[], 0)).unwrap(), 0.0);
    assert_eq!(total_delay(&log_with(&[0.1], 0)).unwrap(), 0.1);
    assert!((total_delay(&log_with(&[0.1, 0.3], 0)).unwrap() - 0.4).abs() < 1e-15);
}

#[test]
fn hit_rate_examples() {
    assert_eq!(cache_hit_rate(&log_with(&[], 0), 10, 10.0), 0.0);
    assert_eq!(cache_hit_rate(&log_with(&[], 100), 10, 10.0), 1.0);
}

#[test]
fn two_seeds_give_two_runs_and_their_mean() {
    let result = run_plan(&tiny_plan(vec![3, 8]), Execution::Sequential).unwrap();
    assert_eq!(result.cells.len(), 2);
    let row = result.row("tree", StrategyKind::MinDelay, 1.5).unwrap();
    assert_eq!(row.seed_count, 2);
    let delays: Vec<f64> = result.cells.iter().map(|c| c.result.as_ref().unwrap().total_delay).collect();
    assert_eq!(row.delay_mean, (delays[0] + delays[1]) / 2.0);
}

#[test]
fn seed_order_does_not_change_aggregates() {
    let a = run_plan(&tiny_plan(vec![3, 8, 5]), Execution::Sequential).unwrap();
    let b = run_plan(&tiny_plan(vec![5, 3, 8]), Execution::Parallel).unwrap();
    assert_eq!(a.rows, b.rows);
}

#[test]
fn result_files_regenerate_identically() {
    let dir = std::env::temp_dir().join(format!("icnsim-exp-{}", std::process::id()));
    let first = dir.join("a");
    let second = dir.join("b");
    let plan = tiny_plan(vec![1, 2]);
    let files_a = run_plan(&plan, Execution::Parallel).unwrap().write(&first).unwrap();
    let files_b = run_plan(&plan, Execution::Sequential).unwrap().write(&second).unwrap();
    assert_eq!(files_a.len(), files_b.len());
    for (a, b) in files_a.iter().zip(&files_b) {
        assert_eq!(a.file_name(), b.file_name());
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
    let runs = std::fs::read_to_string(first.join("runs.csv")).unwrap();
    assert!(runs.starts_with(RUNS_HEADER));
    assert_eq!(runs.lines().count(), 3);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn scenario_runs_from_text() {
    let scenario = Scenario::parse(
        r#"
topology = "ladder"
strategy = "lfum-pi"
arrival_rate = 1.0
horizon_sec = 4
seed = 12
objects = 15
"#,
    )
    .unwrap();
    let (instance, log) = scenario.run().unwrap();
    assert_eq!(log.node_count(), instance.graph.node_count());
    assert!(log.is_complete());
    assert_eq!(log.anomalies.total(), 0);
}
