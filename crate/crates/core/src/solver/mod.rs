//! Exact solution of the routing models, a brute-force oracle and an
//! independent schedule validator.

mod bnb;
mod bounds;
mod brute;
mod heuristic;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{MilpModel, VarRole, Variant};
use crate::{SCHEMA_VERSION, TIME_TOL};

pub use bnb::{solve, solve_with};
pub use bounds::{BoundKind, CompletionBounds};
pub use brute::{brute_force, brute_force_with, BRUTE_FORCE_MAX_NODES};
pub use heuristic::nearest_feasible_neighbor;
pub use validate::{validate, validate_with, Clause, ValidationReport, Violation};

/// Relative tolerance for comparing objective values.
pub const OBJECTIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// Limits hit with an incumbent in hand.
    Feasible,
    Infeasible,
    /// Limits hit before any schedule was found.
    NoSolution,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NoSolution => "no_solution",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveLimits {
    /// Seconds of wall time.
    pub time_limit: f64,
    pub node_limit: u64,
    /// Relative optimality gap at which the search may stop.
    pub gap_tolerance: f64,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits { time_limit: 60.0, node_limit: u64::MAX, gap_tolerance: OBJECTIVE_TOL }
    }
}

impl SolveLimits {
    pub fn check(&self) -> Result<()> {
        if !(self.time_limit > 0.0) || self.node_limit == 0 || !(self.gap_tolerance > 0.0 && self.gap_tolerance < 1.0) {
            return Err(Error::Parameter(format!("invalid solve limits {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub nodes: u64,
    pub incumbent: Option<f64>,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub elapsed_seconds: f64,
    pub bound: Option<BoundKind>,
    pub root_bound: Option<f64>,
    pub warm_start: Option<f64>,
    /// Worst model-row violation of the decoded assignment.
    pub max_row_violation: Option<f64>,
    pub trace: Vec<TracePoint>,
}

impl Default for SolveStats {
    fn default() -> Self {
        SolveStats {
            nodes: 0,
            elapsed_seconds: 0.0,
            bound: None,
            root_bound: None,
            warm_start: None,
            max_row_violation: None,
            trace: Vec::new(),
        }
    }
}

/// A schedule: one route per robot, each `0, ..., v+1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub schema_version: u32,
    pub variant: Variant,
    pub status: SolveStatus,
    pub routes: Vec<Vec<usize>>,
    pub arrival_times: BTreeMap<usize, f64>,
    pub objective: Option<f64>,
    pub lower_bound: Option<f64>,
    pub gap: Option<f64>,
    /// Why no schedule exists, when known.
    pub hint: Option<String>,
    pub instance_digest: String,
    #[serde(default)]
    pub stats: SolveStats,
}

impl Solution {
    /// Schedule from visit-node routes (depot copies omitted), with arrival
    /// times following the no-wait chain.
    pub fn from_routes(inst: &Instance, variant: Variant, status: SolveStatus, routes: &[Vec<usize>]) -> Self {
        let mut arrival_times = BTreeMap::new();
        for route in routes {
            for (node, t) in route.iter().zip(arrival_chain(inst, route)) {
                arrival_times.insert(*node, t);
            }
        }
        let sink = inst.sink();
        let full: Vec<Vec<usize>> = routes
            .iter()
            .map(|r| std::iter::once(0).chain(r.iter().copied()).chain(std::iter::once(sink)).collect())
            .collect();
        let objective = route_cost(inst, &full);
        Solution {
            schema_version: SCHEMA_VERSION,
            variant,
            status,
            routes: full,
            arrival_times,
            objective: Some(objective),
            lower_bound: None,
            gap: None,
            hint: None,
            instance_digest: inst.digest(),
            stats: SolveStats::default(),
        }
    }

    pub fn without_schedule(inst: &Instance, variant: Variant, status: SolveStatus, hint: Option<String>) -> Self {
        Solution {
            schema_version: SCHEMA_VERSION,
            variant,
            status,
            routes: Vec::new(),
            arrival_times: BTreeMap::new(),
            objective: None,
            lower_bound: None,
            gap: None,
            hint,
            instance_digest: inst.digest(),
            stats: SolveStats::default(),
        }
    }

    pub fn has_schedule(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Feasible)
    }

    /// Robot (1-based) serving each visit node.
    pub fn robot_of(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for (k, route) in self.routes.iter().enumerate() {
            for &node in route.iter().skip(1).take(route.len().saturating_sub(2)) {
                out.insert(node, k + 1);
            }
        }
        out
    }

    /// Variable assignment for `model`. Routes are matched to robots by
    /// position; order variables follow the arrival times.
    pub fn to_values(&self, model: &MilpModel) -> Result<Vec<f64>> {
        let mut values = vec![0.0; model.variables.len()];
        for (k, route) in self.routes.iter().enumerate() {
            for w in route.windows(2) {
                let var = model.arc_var(w[0], w[1], k + 1).ok_or_else(|| {
                    Error::Schedule(format!("arc {} -> {} for robot {} is not in the model", w[0], w[1], k + 1))
                })?;
                values[var] = 1.0;
            }
        }
        for (&node, &t) in &self.arrival_times {
            if node >= 1 && node <= model.instance().v() {
                values[model.arrival_var(node)] = t;
            }
        }
        for (idx, var) in model.variables.iter().enumerate() {
            if let VarRole::Order { first, second } = var.role {
                let (Some(&a), Some(&b)) = (self.arrival_times.get(&first), self.arrival_times.get(&second)) else {
                    continue;
                };
                let ab = a + model.instance().service(first) <= b + TIME_TOL;
                let ba = b + model.instance().service(second) <= a + TIME_TOL;
                let before = match (ab, ba) {
                    (true, false) => true,
                    (false, true) => false,
                    _ => (a, first) < (b, second),
                };
                values[idx] = if before { 1.0 } else { 0.0 };
            }
        }
        Ok(values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let sol: Solution = serde_json::from_str(text)?;
        if sol.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema { found: sol.schema_version, expected: SCHEMA_VERSION });
        }
        Ok(sol)
    }
}

/// Arrival times along a route of visit nodes when nobody waits.
pub fn arrival_chain(inst: &Instance, route: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(route.len());
    let mut prev = 0;
    let mut t = inst.e0();
    for &node in route {
        t = if prev == 0 { inst.e0() + inst.t(0, node) } else { t + inst.service(prev) + inst.t(prev, node) };
        out.push(t);
        prev = node;
    }
    out
}

/// Total travel time of full routes (`0, ..., v+1`).
pub fn route_cost(inst: &Instance, routes: &[Vec<usize>]) -> f64 {
    routes.iter().flat_map(|r| r.windows(2)).map(|w| inst.t(w[0], w[1])).sum()
}

/// Overlap length of two occupancy intervals (negative when apart).
pub fn interval_overlap(a: f64, wa: f64, b: f64, wb: f64) -> f64 {
    (a + wa).min(b + wb) - a.max(b)
}

/// Reads a variable assignment (e.g. from an external solver) back into a
/// schedule.
pub fn decode_assignment(model: &MilpModel, values: &[f64], status: SolveStatus) -> Result<Solution> {
    if values.len() != model.variables.len() {
        return Err(Error::Schedule(format!("{} values for {} variables", values.len(), model.variables.len())));
    }
    let inst = model.instance();
    let sink = inst.sink();
    let mut routes = Vec::new();
    for k in 1..=inst.robots {
        let mut route = vec![0];
        let mut at = 0;
        while at != sink {
            let next = (1..=sink).find(|&j| model.arc_var(at, j, k).is_some_and(|x| values[x] > 0.5));
            match next {
                Some(j) if !route.contains(&j) => {
                    route.push(j);
                    at = j;
                }
                Some(j) => return Err(Error::Schedule(format!("robot {k} revisits node {j}"))),
                None => return Err(Error::Schedule(format!("robot {k} route stops at node {at}"))),
            }
        }
        routes.push(route);
    }
    let arrival_times = (1..=inst.v()).map(|i| (i, values[model.arrival_var(i)])).collect();
    let objective = route_cost(inst, &routes);
    let mut sol = Solution {
        schema_version: SCHEMA_VERSION,
        variant: model.variant,
        status,
        routes,
        arrival_times,
        objective: Some(objective),
        lower_bound: None,
        gap: None,
        hint: None,
        instance_digest: model.instance_digest.clone(),
        stats: SolveStats::default(),
    };
    sol.stats.max_row_violation = Some(model.max_violation(values));
    Ok(sol)
}

/// Canonical order of a route set: by first visited node, empty routes last.
pub(crate) fn canonical(mut routes: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    routes.sort_by_key(|r| r.first().copied().unwrap_or(usize::MAX));
    routes
}

pub(crate) fn objective_eps(best: f64) -> f64 {
    OBJECTIVE_TOL * best.abs().max(1.0)
}
