use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use beampath::instance::{generate_instance, GenerateParams};
use beampath::model::{build, export_lp, BigMMode, ModelOptions};
use beampath::parallel::Execution;
use beampath::radio::RadioConfig;
use beampath::seed::{self, Purpose};
use beampath::simulation::{evaluate_schedule, export_results, run_monte_carlo, ExperimentConfig, ExportFormat};
use beampath::solver::{decode_assignment, solve, validate_with, SolveLimits, SolveStatus};
use beampath::{Instance, Scenario, Solution, Variant};

const EXIT_INVALID: u8 = 1;
const EXIT_FEASIBLE: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;
const EXIT_NO_SOLUTION: u8 = 5;

#[derive(Parser)]
#[command(name = "beampath", version, about = "Collision-aware multi-robot routing under mmWave coverage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random instance.
    Generate(GenerateArgs),
    /// Solve an instance exactly.
    Solve(SolveArgs),
    /// Check a schedule against the routing rules.
    Validate(ValidateArgs),
    /// Replay a schedule through the radio model.
    Evaluate(EvaluateArgs),
    /// Run the Monte Carlo comparison and write result tables.
    Experiment(ExperimentArgs),
    /// Write a model in LP format.
    ExportLp(ExportLpArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Cua,
    Ca,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Cua => Variant::Cua,
            VariantArg::Ca => Variant::Ca,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    A,
    B,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::A => Scenario::A,
            ScenarioArg::B => Scenario::B,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BigMArg {
    Uniform,
    PerConstraint,
}

#[derive(Args)]
struct GenerateArgs {
    /// TOML or JSON file with generation parameters; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, ignore_case = true)]
    scenario: Option<ScenarioArg>,
    #[arg(long, required_unless_present = "config")]
    nodes: Option<usize>,
    #[arg(long)]
    robots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// m/s.
    #[arg(long)]
    velocity: Option<f64>,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "cua")]
    variant: VariantArg,
    /// Let robots stay at the depot.
    #[arg(long)]
    allow_idle: bool,
    #[arg(long, value_enum, default_value = "uniform")]
    big_m: BigMArg,
    /// Keep arcs that no schedule can use.
    #[arg(long)]
    no_prune: bool,
}

impl ModelArgs {
    fn options(&self) -> ModelOptions {
        ModelOptions {
            prune_arcs: !self.no_prune,
            allow_idle_robots: self.allow_idle,
            big_m: match self.big_m {
                BigMArg::Uniform => BigMMode::Uniform,
                BigMArg::PerConstraint => BigMMode::PerConstraint,
            },
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Seconds.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long, default_value_t = 1e-9)]
    gap: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Solution JSON as written by `solve`.
    #[arg(long, required_unless_present = "assignment", conflicts_with = "assignment")]
    solution: Option<PathBuf>,
    /// JSON object mapping LP variable names to values, e.g. from an
    /// external MILP solver (either bare or under a "values" key).
    #[arg(long)]
    assignment: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    /// Radio parameters (TOML or JSON).
    #[arg(long)]
    radio: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment configuration (TOML or JSON); defaults apply without it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, value_delimiter = ',', ignore_case = true)]
    scenarios: Option<Vec<ScenarioArg>>,
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<usize>>,
    #[arg(long)]
    robots: Option<usize>,
    #[arg(long)]
    time_limit: Option<f64>,
    /// Run jobs one after another on this thread.
    #[arg(long)]
    sequential: bool,
    #[arg(long, value_enum, default_value = "all")]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    All,
}

#[derive(Args)]
struct ExportLpArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-family variable and constraint counts as JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Validate(a) => validate_cmd(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Experiment(a) => experiment(a),
        Command::ExportLp(a) => export_lp_cmd(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    Instance::load(path).with_context(|| format!("reading instance {}", path.display()))
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal => 0,
        SolveStatus::Feasible => EXIT_FEASIBLE,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::NoSolution => EXIT_NO_SOLUTION,
    }
}

fn generate(a: GenerateArgs) -> Result<u8> {
    let mut params: GenerateParams = match &a.config {
        Some(path) => {
            GenerateParams::parse(&fs::read_to_string(path)?).with_context(|| format!("reading {}", path.display()))?
        }
        None => GenerateParams::default(),
    };
    if let Some(s) = a.scenario {
        params.scenario = s.into();
    }
    if let Some(n) = a.nodes {
        params.nodes = n;
    }
    if let Some(k) = a.robots {
        params.robots = k;
    }
    if let Some(s) = a.seed {
        params.seed = s;
    }
    if let Some(v) = a.velocity {
        params.velocity = v;
    }
    if params.nodes == 0 {
        bail!("--nodes must be at least 1");
    }
    let inst = generate_instance(&params)?;
    emit(a.out.as_deref(), &inst.to_json())?;
    Ok(0)
}

fn solve_cmd(a: SolveArgs) -> Result<u8> {
    let inst = load_instance(&a.instance)?;
    let limits =
        SolveLimits { time_limit: a.time_limit, node_limit: a.node_limit.unwrap_or(u64::MAX), gap_tolerance: a.gap };
    limits.check()?;
    let model = build(&inst, a.model.variant.into(), a.model.options());
    let sol = solve(&model, &limits);
    emit(a.out.as_deref(), &sol.to_json())?;
    match sol.objective {
        Some(obj) => eprintln!("{}: {} (travel time {obj:.4} s, {} nodes)", model.variant, sol.status, sol.stats.nodes),
        None => {
            eprintln!("{}: {}{}", model.variant, sol.status, sol.hint.map(|h| format!(" ({h})")).unwrap_or_default())
        }
    }
    Ok(status_code(sol.status))
}

fn read_assignment(path: &Path, model: &beampath::MilpModel) -> Result<Vec<f64>> {
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let map = value.get("values").unwrap_or(&value);
    let map: BTreeMap<String, f64> =
        serde_json::from_value(map.clone()).context("assignment must map names to numbers")?;
    let mut values = vec![0.0; model.variables.len()];
    for (name, x) in map {
        match model.variable_by_name(&name) {
            Some(idx) => values[idx] = x,
            None if x.abs() < 1e-9 => {}
            None => bail!("assignment sets unknown variable {name}"),
        }
    }
    Ok(values)
}

fn validate_cmd(a: ValidateArgs) -> Result<u8> {
    let inst = load_instance(&a.instance)?;
    let variant: Variant = a.model.variant.into();
    let sol = match (&a.solution, &a.assignment) {
        (Some(path), _) => Solution::from_json(&fs::read_to_string(path)?)?,
        (None, Some(path)) => {
            let model = build(&inst, variant, a.model.options());
            let values = read_assignment(path, &model)?;
            decode_assignment(&model, &values, SolveStatus::Feasible)?
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let report = validate_with(&sol, &inst, variant, a.model.allow_idle);
    println!("{}", serde_json::to_string_pretty(&report)?);
    for (clause, ok) in report.clause_results() {
        eprintln!("{:<16} {}", format!("{clause:?}"), if ok { "pass" } else { "FAIL" });
    }
    for v in &report.violations {
        eprintln!("  {v}");
    }
    Ok(if report.is_valid() { 0 } else { EXIT_INVALID })
}

fn evaluate(a: EvaluateArgs) -> Result<u8> {
    let inst = load_instance(&a.instance)?;
    let sol = Solution::from_json(&fs::read_to_string(&a.solution)?)?;
    let radio = match &a.radio {
        Some(path) => RadioConfig::load(path)?,
        None => RadioConfig::default(),
    }
    .into_params()?;
    let mut rng = seed::rng(a.seed, Purpose::LinkStates, &[]);
    let eval = evaluate_schedule(&sol, &inst, &radio, &mut rng)?;
    emit(a.out.as_deref(), &serde_json::to_string_pretty(&eval)?)?;
    eprintln!(
        "overall rate {:.1} Mbps, {} collision event(s), travel time {:.4} s",
        eval.overall_rate / 1e6,
        eval.collision_events.len(),
        eval.total_travel_time
    );
    Ok(0)
}

fn experiment(a: ExperimentArgs) -> Result<u8> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(r) = a.runs {
        cfg.runs = r;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(s) = a.scenarios {
        cfg.scenarios = s.into_iter().map(Into::into).collect();
    }
    if let Some(n) = a.nodes {
        cfg.node_counts = n;
    }
    if let Some(k) = a.robots {
        cfg.robots = k;
    }
    if let Some(t) = a.time_limit {
        cfg.limits.time_limit = t;
    }
    if a.sequential {
        cfg.execution = Execution::Sequential;
    }
    let results = run_monte_carlo(&cfg)?;
    let format = match a.format {
        FormatArg::Csv => ExportFormat::Csv,
        FormatArg::Json => ExportFormat::Json,
        FormatArg::All => ExportFormat::All,
    };
    let files = export_results(&results, &a.out, format)?;

    println!(
        "{:<8} {:>5} {:>9} {:>9} {:>12} {:>12} {:>10} {:>10}",
        "scenario", "nodes", "headline", "excluded", "mean_impr_%", "max_impr_%", "CUA_tt_s", "CA_tt_s"
    );
    for s in &results.summaries {
        let f = |x: Option<f64>, d: usize| x.map(|v| format!("{v:.d$}")).unwrap_or_else(|| "-".into());
        println!(
            "{:<8} {:>5} {:>9} {:>9} {:>12} {:>12} {:>10} {:>10}",
            s.scenario.to_string(),
            s.n_nodes,
            s.headline_runs,
            s.excluded_runs,
            f(s.improvement_pct.map(|b| b.mean), 2),
            f(s.improvement_pct.map(|b| b.max), 2),
            f(s.cua_travel.map(|b| b.mean), 4),
            f(s.ca_travel.map(|b| b.mean), 4),
        );
    }
    for p in &files.paths {
        eprintln!("wrote {}", p.display());
    }
    Ok(0)
}

fn export_lp_cmd(a: ExportLpArgs) -> Result<u8> {
    let inst = load_instance(&a.instance)?;
    let model = build(&inst, a.model.variant.into(), a.model.options());
    emit(a.out.as_deref(), &export_lp(&model))?;
    if let Some(path) = &a.stats {
        fs::write(path, serde_json::to_string_pretty(&model.stats())? + "\n")?;
    }
    for d in &model.diagnostics {
        eprintln!("warning: {}", serde_json::to_string(d)?);
    }
    Ok(0)
}
