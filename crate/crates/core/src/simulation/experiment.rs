//! Monte Carlo comparison of the two schedules over random instances.

use std::path::Path;

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::BoxStats;
use super::{evaluate_with_links, LinkTable};
use crate::error::{Error, Result};
use crate::geometry::NodeSampling;
use crate::instance::{generate_instance, GenerateParams, LayoutParams, Scenario};
use crate::model::{build, ModelOptions, Variant};
use crate::parallel::{map_ordered, Execution};
use crate::radio::RadioConfig;
use crate::seed::{self, Purpose};
use crate::solver::{solve_with, validate_with, CompletionBounds, SolveLimits, SolveStatus};
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenarios: Vec<Scenario>,
    pub node_counts: Vec<usize>,
    pub robots: usize,
    pub runs: usize,
    pub seed: u64,
    /// m/s.
    pub velocity: f64,
    pub layout: LayoutParams,
    pub sampling: NodeSampling,
    pub radio: RadioConfig,
    pub limits: SolveLimits,
    pub model: ModelOptions,
    pub execution: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenarios: vec![Scenario::A, Scenario::B],
            node_counts: vec![12, 14, 16, 18],
            robots: 3,
            runs: 100,
            seed: 1,
            velocity: 5.0,
            layout: LayoutParams::default(),
            sampling: NodeSampling::default(),
            radio: RadioConfig::default(),
            limits: SolveLimits::default(),
            model: ModelOptions::default(),
            execution: Execution::default(),
        }
    }
}

impl ExperimentConfig {
    /// TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            if text.trim_start().starts_with('{') { serde_json::from_str(text)? } else { toml::from_str(text)? };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn check(&self) -> Result<()> {
        if self.runs == 0 || self.node_counts.is_empty() || self.scenarios.is_empty() || self.robots == 0 {
            return Err(Error::Parameter("experiment needs at least one run, scenario, node count and robot".into()));
        }
        if self.node_counts.contains(&0) {
            return Err(Error::Parameter("node counts must be positive".into()));
        }
        self.limits.check()?;
        self.radio.clone().into_params()?;
        Ok(())
    }

    /// Every `(scenario, node count, run)` in output order.
    pub fn jobs(&self) -> Vec<Job> {
        let mut jobs = Vec::new();
        for &scenario in &self.scenarios {
            for &n_nodes in &self.node_counts {
                for run in 0..self.runs {
                    let coords = [scenario_code(scenario), n_nodes as u64, run as u64];
                    jobs.push(Job {
                        scenario,
                        n_nodes,
                        run,
                        instance_seed: seed::derive(self.seed, Purpose::NodePlacement, &coords),
                        link_seed: seed::derive(self.seed, Purpose::LinkStates, &coords),
                    });
                }
            }
        }
        jobs
    }
}

fn scenario_code(s: Scenario) -> u64 {
    match s {
        Scenario::A => 0,
        Scenario::B => 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub scenario: Scenario,
    pub n_nodes: usize,
    pub run: usize,
    pub instance_seed: u64,
    pub link_seed: u64,
}

/// Outcome of one scheme in one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRecord {
    pub status: SolveStatus,
    /// Total travel time, s.
    pub objective: Option<f64>,
    /// Mean per-node rate, bit/s.
    pub overall_rate: Option<f64>,
    pub collisions: Option<usize>,
    /// Every clause of the validator for this scheme passed.
    pub valid: Option<bool>,
    pub nodes_explored: u64,
    pub error: Option<String>,
}

impl SchemeRecord {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: Scenario,
    pub n_nodes: usize,
    pub run: usize,
    pub instance_seed: u64,
    pub collision_pairs: usize,
    pub cua: SchemeRecord,
    pub ca: SchemeRecord,
    /// `(CA - CUA) / CUA` of the overall rate, percent.
    pub improvement_pct: Option<f64>,
    /// `(CA - CUA) / CUA` of the travel time, percent.
    pub travel_increase_pct: Option<f64>,
}

impl RunRecord {
    /// Both schemes proven optimal; only these enter headline statistics.
    pub fn is_headline(&self) -> bool {
        self.cua.is_optimal() && self.ca.is_optimal()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub scenario: Scenario,
    pub n_nodes: usize,
    pub runs: usize,
    pub headline_runs: usize,
    /// Runs where a scheme stopped short of a proof or failed.
    pub excluded_runs: usize,
    pub cua_rate: Option<BoxStats>,
    pub ca_rate: Option<BoxStats>,
    pub improvement_pct: Option<BoxStats>,
    pub cua_travel: Option<BoxStats>,
    pub ca_travel: Option<BoxStats>,
    pub travel_increase_pct: Option<BoxStats>,
    pub cua_runs_with_collisions: usize,
    pub ca_runs_with_collisions: usize,
    pub mean_collision_pairs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub jobs: Vec<Job>,
    pub records: Vec<RunRecord>,
    pub summaries: Vec<CellSummary>,
}

pub fn run_monte_carlo(config: &ExperimentConfig) -> Result<ExperimentResults> {
    config.check()?;
    let radio = config.radio.clone().into_params()?;
    let layout = config.layout.build()?;
    let jobs = config.jobs();
    info!("running {} Monte Carlo jobs", jobs.len());
    let records = map_ordered(config.execution, &jobs, |job| run_job(config, &radio, &layout, job));
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    let summaries = summarize(config, &records);
    Ok(ExperimentResults { schema_version: SCHEMA_VERSION, config: config.clone(), jobs, records, summaries })
}

fn run_job(
    config: &ExperimentConfig,
    radio: &crate::radio::RadioParams,
    layout: &crate::geometry::CellLayout,
    job: &Job,
) -> Result<RunRecord> {
    let inst = generate_instance(&GenerateParams {
        scenario: job.scenario,
        nodes: job.n_nodes,
        robots: config.robots,
        seed: job.instance_seed,
        layout: config.layout,
        velocity: config.velocity,
        sampling: config.sampling.clone(),
    })?;
    let idle = config.model.allow_idle_robots;
    let bounds = CompletionBounds::new(&inst, idle);
    let mut rng = ChaCha8Rng::seed_from_u64(job.link_seed);
    let links = LinkTable::sample(&inst, layout, radio, &mut rng);

    let scheme = |variant: Variant| {
        let model = build(&inst, variant, config.model);
        let sol = solve_with(&model, &config.limits, Some(&bounds));
        let mut rec = SchemeRecord {
            status: sol.status,
            objective: sol.objective,
            overall_rate: None,
            collisions: None,
            valid: None,
            nodes_explored: sol.stats.nodes,
            error: None,
        };
        if sol.has_schedule() {
            rec.valid = Some(validate_with(&sol, &inst, variant, idle).is_valid());
            match evaluate_with_links(&sol, &inst, layout, radio, &links) {
                Ok(eval) => {
                    rec.overall_rate = Some(eval.overall_rate);
                    rec.collisions = Some(eval.collision_events.len());
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
        }
        if sol.status != SolveStatus::Optimal {
            warn!("scenario {} n={} run {}: {} finished {}", job.scenario, job.n_nodes, job.run, variant, sol.status);
        }
        rec
    };
    let cua = scheme(Variant::Cua);
    let ca = scheme(Variant::Ca);
    let improvement_pct = match (cua.overall_rate, ca.overall_rate) {
        (Some(a), Some(b)) if a > 0.0 => Some((b - a) / a * 100.0),
        _ => None,
    };
    let travel_increase_pct = match (cua.objective, ca.objective) {
        (Some(a), Some(b)) if a > 0.0 => Some((b - a) / a * 100.0),
        _ => None,
    };
    Ok(RunRecord {
        scenario: job.scenario,
        n_nodes: job.n_nodes,
        run: job.run,
        instance_seed: job.instance_seed,
        collision_pairs: inst.collisions.pair_count(),
        cua,
        ca,
        improvement_pct,
        travel_increase_pct,
    })
}

/// Per `(scenario, node count)` aggregates over headline runs.
pub fn summarize(config: &ExperimentConfig, records: &[RunRecord]) -> Vec<CellSummary> {
    let mut out = Vec::new();
    for &scenario in &config.scenarios {
        for &n_nodes in &config.node_counts {
            let cell: Vec<&RunRecord> =
                records.iter().filter(|r| r.scenario == scenario && r.n_nodes == n_nodes).collect();
            let head: Vec<&RunRecord> = cell.iter().copied().filter(|r| r.is_headline()).collect();
            let collect =
                |f: &dyn Fn(&RunRecord) -> Option<f64>| -> Vec<f64> { head.iter().filter_map(|r| f(r)).collect() };
            out.push(CellSummary {
                scenario,
                n_nodes,
                runs: cell.len(),
                headline_runs: head.len(),
                excluded_runs: cell.len() - head.len(),
                cua_rate: BoxStats::from_values(&collect(&|r| r.cua.overall_rate)),
                ca_rate: BoxStats::from_values(&collect(&|r| r.ca.overall_rate)),
                improvement_pct: BoxStats::from_values(&collect(&|r| r.improvement_pct)),
                cua_travel: BoxStats::from_values(&collect(&|r| r.cua.objective)),
                ca_travel: BoxStats::from_values(&collect(&|r| r.ca.objective)),
                travel_increase_pct: BoxStats::from_values(&collect(&|r| r.travel_increase_pct)),
                cua_runs_with_collisions: head.iter().filter(|r| r.cua.collisions.unwrap_or(0) > 0).count(),
                ca_runs_with_collisions: head.iter().filter(|r| r.ca.collisions.unwrap_or(0) > 0).count(),
                mean_collision_pairs: if cell.is_empty() {
                    0.0
                } else {
                    cell.iter().map(|r| r.collision_pairs as f64).sum::<f64>() / cell.len() as f64
                },
            });
        }
    }
    out
}
