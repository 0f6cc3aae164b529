use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use icnsim::experiments::{
    resolve_instance, run_plan, ExperimentPlan, InstanceOptions, RunSummary, Scenario, DEFAULT_SEED_COUNT,
};
use icnsim::fluid::{check_modified_conditions, default_tolerance, load_point, point_to_toml, FluidProblem, ForwardingCachingPoint};
use icnsim::mindelay::online::{FlowEstimator, RateEstimator};
use icnsim::mindelay::{run_fluid_mindelay, RunOptions, Schedule, StopReason};
use icnsim::sim::{SimConfig, StrategyKind};
use icnsim::topology::{builtin, builtin_names, Instance, Preset};
use icnsim::{Error, Execution};

const OUT_ENV: &str = "ICNSIM_OUT_DIR";
const DEFAULT_OUT: &str = "icnsim-out";

#[derive(Parser, Debug)]
#[command(name = "icnsim", version, about = "Fluid solver and packet-level simulator for joint forwarding and caching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the MinDelay conditional-gradient iteration on the fluid model.
    SolveFluid(SolveFluidArgs),
    /// Check the optimality conditions at a given operating point.
    CheckConditions(CheckArgs),
    /// Run one packet-level simulation.
    Simulate(SimulateArgs),
    /// Run a strategy × topology × rate sweep over several seeds.
    Experiment(ExperimentArgs),
    /// List the built-in topologies.
    ListTopologies(TopologyArgs),
}

#[derive(Args, Debug, Clone)]
struct TopologyArgs {
    /// Workload scale of built-in topologies.
    #[arg(long, default_value = "desk", value_parser = parse_preset)]
    preset: Preset,
    /// Catalog size of built-in topologies.
    #[arg(long)]
    objects: Option<usize>,
    /// Cache size of every node of a built-in topology, in objects.
    #[arg(long)]
    cache_size: Option<usize>,
    /// Link capacity of built-in topologies (required for abilene).
    #[arg(long)]
    capacity_mbps: Option<f64>,
}

impl TopologyArgs {
    fn options(&self) -> InstanceOptions {
        InstanceOptions {
            preset: self.preset,
            objects: self.objects,
            cache_size: self.cache_size,
            capacity_mbps: self.capacity_mbps,
            data_bits: None,
        }
    }
}

#[derive(Args, Debug)]
struct FluidInstanceArgs {
    /// Topology file with demand, or a built-in topology name.
    #[arg(long, short = 't', visible_alias = "topology")]
    instance: String,
    /// Per-requester arrival rate replacing the instance's own demand.
    #[arg(long)]
    rate: Option<f64>,
    #[command(flatten)]
    topology: TopologyArgs,
}

#[derive(Args, Debug)]
struct SolveFluidArgs {
    #[command(flatten)]
    instance: FluidInstanceArgs,
    /// Initial point; uniform forwarding and empty caches by default.
    #[arg(long)]
    point: Option<PathBuf>,
    /// Maximum number of steps.
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Constant stepsize in (0, 1].
    #[arg(long, default_value_t = 1.0, conflicts_with = "diminishing")]
    stepsize: f64,
    /// Use the stepsize 2/(n+2) instead of a constant.
    #[arg(long)]
    diminishing: bool,
    /// Condition tolerance; relative to the cost by default.
    #[arg(long)]
    tol: Option<f64>,
    /// Directory for trajectory.csv and the final and best points.
    #[arg(long, env = OUT_ENV)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    instance: FluidInstanceArgs,
    /// Operating point to check.
    #[arg(long)]
    point: PathBuf,
    /// Condition tolerance; relative to the cost by default.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct SimArgs {
    /// Arrival horizon in seconds; the preset's by default.
    #[arg(long)]
    horizon: Option<f64>,
    /// Seconds between marginal-cost updates and VIP slots.
    #[arg(long)]
    update_interval: Option<f64>,
    #[arg(long, value_parser = parse_flow_estimator)]
    flow_estimator: Option<FlowEstimator>,
    #[arg(long, value_parser = parse_rate_estimator)]
    rate_estimator: Option<RateEstimator>,
    /// Abort a run after this many wall-clock seconds.
    #[arg(long)]
    time_limit: Option<f64>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Scenario file; replaces the topology, strategy and rate flags.
    #[arg(long, conflicts_with_all = ["topology", "strategy", "rate"])]
    scenario: Option<PathBuf>,
    /// Built-in topology name or topology file.
    #[arg(long, short = 't', required_unless_present = "scenario")]
    topology: Option<String>,
    #[arg(long, short = 's', required_unless_present = "scenario", value_parser = parse_strategy)]
    strategy: Option<StrategyKind>,
    /// Requests per node per second.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    topo: TopologyArgs,
    #[arg(long, env = OUT_ENV, default_value = DEFAULT_OUT)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Plan file; replaces the grid flags.
    #[arg(long, conflicts_with_all = ["topology", "strategy", "rate", "seeds"])]
    plan: Option<PathBuf>,
    /// Topologies (comma separated or repeated).
    #[arg(long, short = 't', value_delimiter = ',', required_unless_present = "plan")]
    topology: Vec<String>,
    /// Strategies; all four by default.
    #[arg(long, short = 's', value_delimiter = ',', value_parser = parse_strategy)]
    strategy: Vec<StrategyKind>,
    /// Arrival rates (comma separated or repeated).
    #[arg(long, value_delimiter = ',', required_unless_present = "plan")]
    rate: Vec<f64>,
    /// Number of seeds.
    #[arg(long)]
    seeds: Option<u64>,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    topo: TopologyArgs,
    /// Run cells one after another.
    #[arg(long)]
    sequential: bool,
    #[arg(long, env = OUT_ENV)]
    out: Option<PathBuf>,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_strategy(s: &str) -> Result<StrategyKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_flow_estimator(s: &str) -> Result<FlowEstimator, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_rate_estimator(s: &str) -> Result<RateEstimator, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A failure reported as one `error: kind=<kind>: <message>` line.
#[derive(Debug)]
struct Failure {
    kind: &'static str,
    code: u8,
    message: String,
}

impl Failure {
    fn anomaly(message: String) -> Self {
        Failure {
            kind: "anomaly",
            code: 3,
            message,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (kind, code) = match &e {
            Error::Config(_) | Error::Parse(_) | Error::UnreachableSource { .. } | Error::Infeasible(_) => ("config", 2),
            Error::IncompleteLog { .. } => ("anomaly", 3),
            Error::Stalled { .. } | Error::Livelock { .. } => ("livelock", 4),
            Error::Io(_) => ("io", 1),
        };
        Failure {
            kind,
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CliResult<T> = Result<T, Failure>;

fn single_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or_default();
            let message = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("error: kind=usage: {}", single_line(message));
            return ExitCode::from(2);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: kind={}: {}", f.kind, single_line(&f.message));
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::SolveFluid(args) => solve_fluid(args),
        Command::CheckConditions(args) => check_conditions(args),
        Command::Simulate(args) => simulate(args),
        Command::Experiment(args) => experiment(args),
        Command::ListTopologies(args) => list_topologies(&args),
    }
}

fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} `{}` does not exist", path.display())).into())
    }
}

fn prepare_out(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn load_fluid_instance(args: &FluidInstanceArgs) -> CliResult<Instance> {
    if !builtin_names().contains(&args.instance.as_str()) {
        require_file(Path::new(&args.instance), "instance")?;
    }
    let mut instance = resolve_instance(&args.instance, &args.topology.options())?;
    if let Some(r) = args.rate {
        instance.demand = instance.demand.with_rate(r);
    }
    Ok(instance)
}

fn cached_summary(instance: &Instance, routing: &icnsim::topology::RoutingGraph, point: &ForwardingCachingPoint) -> String {
    let g = &instance.graph;
    let mut parts = Vec::new();
    for i in 0..g.node_count() {
        let objects: Vec<String> = (0..g.object_count())
            .filter(|&k| point.rho(routing, k, i) != 0.0)
            .map(|k| {
                let r = point.rho(routing, k, i);
                if r == 1.0 {
                    (k + 1).to_string()
                } else {
                    format!("{}@{r}", k + 1)
                }
            })
            .collect();
        if !objects.is_empty() {
            parts.push(format!("{}:[{}]", g.node_name(i), objects.join(",")));
        }
    }
    if parts.is_empty() {
        "none".into()
    } else {
        parts.join(" ")
    }
}

fn solve_fluid(args: SolveFluidArgs) -> CliResult<()> {
    if let Some(p) = &args.point {
        require_file(p, "point")?;
    }
    if let Some(dir) = &args.out {
        prepare_out(dir)?;
    }
    let instance = load_fluid_instance(&args.instance)?;
    let routing = instance.routing()?;
    let demand = instance.demand()?;
    let problem = FluidProblem::new(&instance.graph, &routing, &demand);
    let init = match &args.point {
        Some(p) => load_point(p, &instance.graph, &routing)?,
        None => ForwardingCachingPoint::uniform(&routing),
    };
    let options = RunOptions {
        max_steps: args.steps,
        schedule: if args.diminishing {
            Schedule::Diminishing
        } else {
            Schedule::Constant(args.stepsize)
        },
        tolerance: args.tol,
    };
    let traj = run_fluid_mindelay(&problem, init, &options)?;
    let stop = match traj.stop {
        StopReason::Converged => "converged".to_string(),
        StopReason::FixedPoint => "fixed-point".to_string(),
        StopReason::Cycle { first_seen } => format!("cycle (returns to iterate {first_seen})"),
        StopReason::StepLimit => "step-limit".to_string(),
    };
    let mut out = std::io::stdout().lock();
    writeln!(out, "instance: {}", instance.name)?;
    writeln!(out, "stop: {stop} after {} steps", traj.records.len() - 1)?;
    writeln!(out, "final cost: {}", traj.final_cost())?;
    writeln!(out, "best cost: {}", traj.best_cost)?;
    writeln!(out, "final cache: {}", cached_summary(&instance, &routing, &traj.final_point))?;
    match &args.out {
        Some(dir) => {
            std::fs::write(dir.join("trajectory.csv"), traj.to_csv())?;
            std::fs::write(dir.join("final_point.toml"), point_to_toml(&traj.final_point, &instance.graph, &routing))?;
            std::fs::write(dir.join("best_point.toml"), point_to_toml(&traj.best_point, &instance.graph, &routing))?;
            writeln!(out, "wrote {}", dir.display())?;
        }
        None => {
            write!(out, "{}", traj.to_csv())?;
        }
    }
    Ok(())
}

fn check_conditions(args: CheckArgs) -> CliResult<()> {
    require_file(&args.point, "point")?;
    let instance = load_fluid_instance(&args.instance)?;
    let routing = instance.routing()?;
    let demand = instance.demand()?;
    let problem = FluidProblem::new(&instance.graph, &routing, &demand);
    let point = load_point(&args.point, &instance.graph, &routing)?;
    let solution = problem.evaluate(&point);
    let tol = args.tol.unwrap_or_else(|| default_tolerance(solution.cost));
    let report = check_modified_conditions(&problem, &point, &solution, tol);
    let mut out = std::io::stdout().lock();
    writeln!(out, "cost: {}", solution.cost)?;
    write!(out, "{}", report.render(&instance.graph))?;
    Ok(())
}

fn sim_config(args: &SimArgs, preset: Preset, seed: u64) -> CliResult<SimConfig> {
    let mut config = SimConfig {
        horizon: args.horizon.unwrap_or(preset.horizon()),
        seed,
        ..SimConfig::default()
    };
    if let Some(t) = args.update_interval {
        config.params.update_interval = t;
    }
    if let Some(e) = args.flow_estimator {
        config.params.flow_estimator = e;
    }
    if let Some(e) = args.rate_estimator {
        config.params.rate_estimator = e;
    }
    if let Some(s) = args.time_limit {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Config("time limit must be positive".into()).into());
        }
        config.wall_clock_limit = Some(std::time::Duration::from_secs_f64(s));
    }
    Ok(config)
}

fn file_label(topology: &str) -> String {
    Path::new(topology)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(topology)
        .to_string()
}

fn simulate(args: SimulateArgs) -> CliResult<()> {
    let scenario = match &args.scenario {
        Some(path) => {
            require_file(path, "scenario")?;
            let mut s = Scenario::load(path)?;
            let limit = sim_config(&args.sim, s.instance.preset, s.config.seed)?.wall_clock_limit;
            if limit.is_some() {
                s.config.wall_clock_limit = limit;
            }
            s
        }
        None => {
            let topology = args.topology.clone().expect("required by clap");
            if !builtin_names().contains(&topology.as_str()) {
                require_file(Path::new(&topology), "topology")?;
            }
            Scenario {
                topology,
                strategy: args.strategy.expect("required by clap"),
                rate: args.rate,
                instance: args.topo.options(),
                config: sim_config(&args.sim, args.topo.preset, args.seed)?,
            }
        }
    };
    prepare_out(&args.out)?;
    let (instance, log) = scenario.run()?;
    let rate = scenario.rate.map_or("file".to_string(), |r| r.to_string());
    let path = args.out.join(format!(
        "{}-{}-rate{}-seed{}.csv",
        file_label(&scenario.topology),
        scenario.strategy,
        rate,
        scenario.config.seed
    ));
    log.write_csv(&path)?;

    let mut out = std::io::stdout().lock();
    writeln!(out, "topology: {} ({} nodes)", instance.name, instance.graph.node_count())?;
    writeln!(out, "strategy: {}", scenario.strategy)?;
    writeln!(out, "generated: {}", log.generated)?;
    writeln!(out, "fulfilled: {}", log.fulfilled())?;
    writeln!(out, "pit remaining: {}", log.pit_remaining)?;
    writeln!(out, "anomalies: {}", log.anomalies.total())?;
    writeln!(out, "trace hash: {:016x}", log.trace_hash)?;
    match RunSummary::from_log(&log) {
        Ok(s) => {
            writeln!(out, "total delay: {}", s.total_delay)?;
            writeln!(out, "mean delay: {}", s.mean_delay)?;
            writeln!(out, "cache hits per node per sec: {}", s.hit_rate)?;
        }
        Err(e) => writeln!(out, "delay: unavailable ({e})")?,
    }
    writeln!(out, "metrics: {}", path.display())?;
    drop(out);

    let a = &log.anomalies;
    if a.total() > 0 || log.pit_remaining > 0 || !log.is_complete() {
        return Err(Failure::anomaly(format!(
            "no_route={} orphan_data={} nonce_collisions={} cache_violations={} invalid_hops={} pit_remaining={} unfulfilled={}",
            a.no_route,
            a.orphan_data,
            a.nonce_collisions,
            a.cache_violations,
            a.invalid_hops,
            log.pit_remaining,
            log.generated - log.fulfilled()
        )));
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> CliResult<()> {
    let mut plan = match &args.plan {
        Some(path) => {
            require_file(path, "plan")?;
            ExperimentPlan::load(path)?
        }
        None => {
            let strategies = if args.strategy.is_empty() {
                StrategyKind::ALL.to_vec()
            } else {
                args.strategy.clone()
            };
            let mut plan = ExperimentPlan::new(args.topology.clone(), strategies, args.rate.clone(), args.topo.preset);
            let count = args.seeds.unwrap_or(DEFAULT_SEED_COUNT);
            plan.seeds = (args.seed..args.seed.saturating_add(count)).collect();
            plan.instance = args.topo.options();
            plan
        }
    };
    let config = sim_config(&args.sim, plan.instance.preset, 0)?;
    if args.sim.horizon.is_some() {
        plan.horizon = config.horizon;
    }
    if args.sim.update_interval.is_some() {
        plan.params.update_interval = config.params.update_interval;
    }
    if args.sim.flow_estimator.is_some() {
        plan.params.flow_estimator = config.params.flow_estimator;
    }
    if args.sim.rate_estimator.is_some() {
        plan.params.rate_estimator = config.params.rate_estimator;
    }
    if config.wall_clock_limit.is_some() {
        plan.wall_clock_limit = config.wall_clock_limit;
    }
    if args.plan.is_some() {
        apply_topology_overrides(&mut plan, &args.topo);
    }
    plan.validate()?;
    for t in &plan.topologies {
        if !builtin_names().contains(&t.as_str()) {
            require_file(Path::new(t), "topology")?;
        }
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| plan.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    prepare_out(&out_dir)?;

    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let result = run_plan(&plan, exec)?;
    let written = result.write(&out_dir)?;

    let mut out = std::io::stdout().lock();
    writeln!(out, "cells: {}", result.cells.len())?;
    for p in &written {
        writeln!(out, "wrote {}", p.display())?;
    }
    drop(out);

    let failed = result.failures().count();
    let anomalies = result.anomaly_count();
    if failed > 0 || anomalies > 0 {
        let first = result
            .failures()
            .next()
            .and_then(|c| c.result.as_ref().err().cloned())
            .unwrap_or_default();
        return Err(Failure::anomaly(format!(
            "{failed} failed cells, {anomalies} anomalies; first failure: {first}"
        )));
    }
    Ok(())
}

/// Command-line topology flags refine a plan file.
fn apply_topology_overrides(plan: &mut ExperimentPlan, topo: &TopologyArgs) {
    if topo.objects.is_some() {
        plan.instance.objects = topo.objects;
    }
    if topo.cache_size.is_some() {
        plan.instance.cache_size = topo.cache_size;
    }
    if topo.capacity_mbps.is_some() {
        plan.instance.capacity_mbps = topo.capacity_mbps;
    }
}

fn list_topologies(args: &TopologyArgs) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "name\tnodes\tduplex_links\tobjects\tcache_sizes")?;
    for &name in builtin_names() {
        let mut opts = args.options().builtin_options();
        let needs_capacity = opts.capacity_mbps.is_none() && name == "abilene";
        opts.capacity_mbps.get_or_insert(50.0);
        let inst = builtin(name, &opts)?;
        let g = &inst.graph;
        let mut caches: Vec<usize> = (0..g.node_count()).map(|i| g.cache_capacity(i)).collect();
        caches.sort_unstable();
        caches.dedup();
        let caches: Vec<String> = caches.iter().map(usize::to_string).collect();
        writeln!(
            out,
            "{name}\t{}\t{}\t{}\t{}{}",
            g.node_count(),
            g.links().len() / 2,
            g.object_count(),
            caches.join("/"),
            if needs_capacity { "\t(requires --capacity-mbps)" } else { "" }
        )?;
    }
    Ok(())
}
