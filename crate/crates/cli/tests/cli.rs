use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn icnsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icnsim"))
        .args(args)
        .env_remove("ICNSIM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_conditions_flags_the_worse_cache_choice() {
    let instance = fixture("triangle.toml");
    let bad = icnsim(&[
        "check-conditions",
        "--instance",
        instance.to_str().unwrap(),
        "--point",
        fixture("triangle_object1_cached.toml").to_str().unwrap(),
    ]);
    assert!(bad.status.success());
    let text = stdout(&bad);
    assert!(text.contains("modified conditions: VIOLATED"), "{text}");
    assert!(text.contains("caching node=1 object=1"), "{text}");

    let good = icnsim(&[
        "check-conditions",
        "-t",
        instance.to_str().unwrap(),
        "--point",
        fixture("triangle_object2_cached.toml").to_str().unwrap(),
    ]);
    assert!(good.status.success());
    assert!(stdout(&good).contains("modified conditions: satisfied"));
}

#[test]
fn solve_fluid_writes_trajectory_and_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = icnsim(&[
        "solve-fluid",
        "-t",
        fixture("triangle.toml").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("stop: converged"), "{text}");
    assert!(text.contains("final cache: 1:[2]"), "{text}");

    let trajectory = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(trajectory.starts_with("iteration,cost,violations\n"));
    let last = trajectory.lines().last().unwrap();
    assert!(last.ends_with(",0"), "{last}");

    // The written point is accepted back as input and is optimal.
    let check = icnsim(&[
        "check-conditions",
        "-t",
        fixture("triangle.toml").to_str().unwrap(),
        "--point",
        dir.path().join("final_point.toml").to_str().unwrap(),
    ]);
    assert!(stdout(&check).contains("modified conditions: satisfied"));
}

#[test]
fn simulate_writes_metrics_and_reports_a_clean_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = icnsim(&[
        "simulate",
        "-t",
        "tree",
        "-s",
        "mindelay",
        "--rate",
        "1",
        "--seed",
        "4",
        "--horizon",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("anomalies: 0"), "{text}");
    assert!(text.contains("pit remaining: 0"), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("tree-mindelay-rate1-seed4.csv")).unwrap();
    assert!(csv.starts_with("event,creation_time,fulfill_time,object,node\n"));

    let again = icnsim(&[
        "simulate", "-t", "tree", "-s", "mindelay", "--rate", "1", "--seed", "4", "--horizon", "5", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn experiment_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = icnsim(&[
        "experiment",
        "-t",
        "tree,ladder",
        "-s",
        "lfum-pi,bp",
        "--rate",
        "0.5",
        "--seeds",
        "2",
        "--horizon",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    for file in ["tree.csv", "ladder.csv", "runs.csv"] {
        assert!(dir.path().join(file).is_file(), "{file} missing");
    }
    let runs = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 2 * 2 * 2);
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let cases: &[&[&str]] = &[
        &["simulate", "-t", "nowhere", "-s", "bp"],
        &["simulate", "-t", "tree", "-s", "nonsense"],
        &["simulate", "-t", "abilene", "-s", "bp"],
        &["check-conditions", "-t", "tree", "--point", "missing.toml"],
        &["solve-fluid", "-t", "tree", "--stepsize", "0"],
        &["bogus-command"],
    ];
    for args in cases {
        let out = icnsim(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        let err = stderr(&out);
        assert!(err.starts_with("error: kind="), "{args:?}: {err}");
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
    }
}

#[test]
fn list_topologies_names_every_builtin() {
    let out = icnsim(&["list-topologies"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["abilene", "geant", "dtelekom", "tree", "ladder", "fattree"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn help_succeeds() {
    let out = icnsim(&["--help"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("solve-fluid"));
}
