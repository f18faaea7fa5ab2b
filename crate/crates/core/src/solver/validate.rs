//! Checks a schedule against the routing rules directly, without the model.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{interval_overlap, route_cost, Solution};
use crate::instance::Instance;
use crate::model::Variant;
use crate::TIME_TOL;

/// Relative tolerance for the reported objective.
const OBJECTIVE_CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    RobotCount,
    DepotStart,
    DepotEnd,
    NonEmptyRoute,
    KnownNodes,
    VisitOnce,
    ArrivalTimes,
    Window,
    ArrivalChain,
    ReturnDeadline,
    Objective,
    NoOverlap,
}

impl Clause {
    pub fn applies_to(self, variant: Variant) -> bool {
        self != Clause::NoOverlap || variant == Variant::Ca
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    RobotCount { found: usize, expected: usize },
    RouteStart { robot: usize, found: Option<usize> },
    RouteEnd { robot: usize, found: Option<usize> },
    EmptyRoute { robot: usize },
    UnknownNode { robot: usize, node: usize },
    DuplicateVisit { node: usize, robots: Vec<usize> },
    MissingVisit { node: usize },
    MissingArrival { node: usize },
    WindowLower { node: usize, arrival: f64, earliest: f64 },
    WindowUpper { node: usize, arrival: f64, latest: f64 },
    ArrivalChain { robot: usize, from: usize, to: usize, expected: f64, found: f64 },
    ReturnDeadline { robot: usize, node: usize, back: f64, horizon: f64 },
    ObjectiveMismatch { reported: Option<f64>, recomputed: f64 },
    Overlap { first: usize, second: usize, overlap: f64 },
}

impl Violation {
    pub fn clause(&self) -> Clause {
        match self {
            Violation::RobotCount { .. } => Clause::RobotCount,
            Violation::RouteStart { .. } => Clause::DepotStart,
            Violation::RouteEnd { .. } => Clause::DepotEnd,
            Violation::EmptyRoute { .. } => Clause::NonEmptyRoute,
            Violation::UnknownNode { .. } => Clause::KnownNodes,
            Violation::DuplicateVisit { .. } | Violation::MissingVisit { .. } => Clause::VisitOnce,
            Violation::MissingArrival { .. } => Clause::ArrivalTimes,
            Violation::WindowLower { .. } | Violation::WindowUpper { .. } => Clause::Window,
            Violation::ArrivalChain { .. } => Clause::ArrivalChain,
            Violation::ReturnDeadline { .. } => Clause::ReturnDeadline,
            Violation::ObjectiveMismatch { .. } => Clause::Objective,
            Violation::Overlap { .. } => Clause::NoOverlap,
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::RobotCount { found, expected } => write!(f, "{found} routes for {expected} robots"),
            Violation::RouteStart { robot, found } => write!(f, "robot {robot} starts at {found:?}, not the depot 0"),
            Violation::RouteEnd { robot, found } => write!(f, "robot {robot} ends at {found:?}, not the depot copy"),
            Violation::EmptyRoute { robot } => write!(f, "robot {robot} serves no node"),
            Violation::UnknownNode { robot, node } => write!(f, "robot {robot} visits unknown node {node}"),
            Violation::DuplicateVisit { node, robots } => {
                write!(f, "node {node} visited more than once (robots {robots:?})")
            }
            Violation::MissingVisit { node } => write!(f, "node {node} is never visited"),
            Violation::MissingArrival { node } => write!(f, "node {node} has no arrival time"),
            Violation::WindowLower { node, arrival, earliest } => {
                write!(f, "node {node} reached at {arrival} s before it opens at {earliest} s")
            }
            Violation::WindowUpper { node, arrival, latest } => {
                write!(f, "node {node} reached at {arrival} s after it closes at {latest} s")
            }
            Violation::ArrivalChain { robot, from, to, expected, found } => {
                write!(f, "robot {robot}: arrival at {to} after {from} should be {expected} s, found {found} s")
            }
            Violation::ReturnDeadline { robot, node, back, horizon } => {
                write!(f, "robot {robot} leaves {node} and is home at {back} s, after {horizon} s")
            }
            Violation::ObjectiveMismatch { reported, recomputed } => {
                write!(f, "objective {reported:?} but the routes cost {recomputed}")
            }
            Violation::Overlap { first, second, overlap } => {
                write!(f, "collision pair ({first}, {second}) served simultaneously for {overlap} s")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub variant: Variant,
    pub checked: Vec<Clause>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn failed_clauses(&self) -> Vec<Clause> {
        let mut out: Vec<Clause> = self.violations.iter().map(Violation::clause).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Pass/fail per checked clause.
    pub fn clause_results(&self) -> BTreeMap<Clause, bool> {
        let failed = self.failed_clauses();
        self.checked.iter().map(|&c| (c, !failed.contains(&c))).collect()
    }
}

pub fn validate(solution: &Solution, inst: &Instance, variant: Variant) -> ValidationReport {
    validate_with(solution, inst, variant, false)
}

pub fn validate_with(
    solution: &Solution,
    inst: &Instance,
    variant: Variant,
    allow_idle_robots: bool,
) -> ValidationReport {
    let v = inst.v();
    let sink = inst.sink();
    let mut out = Vec::new();

    if solution.routes.len() != inst.robots {
        out.push(Violation::RobotCount { found: solution.routes.len(), expected: inst.robots });
    }
    let mut visitors: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, route) in solution.routes.iter().enumerate() {
        let robot = k + 1;
        if route.first() != Some(&0) {
            out.push(Violation::RouteStart { robot, found: route.first().copied() });
        }
        if route.last() != Some(&sink) || route.len() < 2 {
            out.push(Violation::RouteEnd { robot, found: route.last().copied() });
        }
        let interior = interior(route, sink);
        if interior.is_empty() && !allow_idle_robots {
            out.push(Violation::EmptyRoute { robot });
        }
        for &node in &interior {
            if node == 0 || node > v {
                out.push(Violation::UnknownNode { robot, node });
            } else {
                visitors.entry(node).or_default().push(robot);
            }
        }
    }
    for node in 1..=v {
        match visitors.get(&node) {
            None => out.push(Violation::MissingVisit { node }),
            Some(r) if r.len() > 1 => out.push(Violation::DuplicateVisit { node, robots: r.clone() }),
            _ => {}
        }
    }
    for node in visitors.keys().copied() {
        let Some(&t) = solution.arrival_times.get(&node) else {
            out.push(Violation::MissingArrival { node });
            continue;
        };
        let w = inst.node(node);
        if t < w.earliest - TIME_TOL {
            out.push(Violation::WindowLower { node, arrival: t, earliest: w.earliest });
        }
        if t > w.latest + TIME_TOL {
            out.push(Violation::WindowUpper { node, arrival: t, latest: w.latest });
        }
    }

    for (k, route) in solution.routes.iter().enumerate() {
        let robot = k + 1;
        let nodes: Vec<usize> = interior(route, sink).into_iter().filter(|&n| n >= 1 && n <= v).collect();
        let mut prev = 0;
        let mut clock = inst.e0();
        for &node in &nodes {
            let Some(&t) = solution.arrival_times.get(&node) else { break };
            let expected =
                if prev == 0 { inst.e0() + inst.t(0, node) } else { clock + inst.service(prev) + inst.t(prev, node) };
            if (t - expected).abs() > TIME_TOL {
                out.push(Violation::ArrivalChain { robot, from: prev, to: node, expected, found: t });
            }
            prev = node;
            clock = t;
        }
        if let (Some(&last), true) = (nodes.last(), prev != 0) {
            let back = clock + inst.service(last) + inst.t(last, sink);
            if back > inst.horizon() + TIME_TOL {
                out.push(Violation::ReturnDeadline { robot, node: last, back, horizon: inst.horizon() });
            }
        }
    }

    let well_formed = solution.routes.iter().flatten().all(|&n| n <= sink);
    if well_formed {
        let recomputed = route_cost(inst, &solution.routes);
        let ok = solution
            .objective
            .is_some_and(|o| (o - recomputed).abs() <= OBJECTIVE_CHECK_TOL * recomputed.abs().max(1.0));
        if !ok {
            out.push(Violation::ObjectiveMismatch { reported: solution.objective, recomputed });
        }
    }

    if variant == Variant::Ca {
        for (i, j) in inst.collisions.pairs() {
            let (Some(&ti), Some(&tj)) = (solution.arrival_times.get(&i), solution.arrival_times.get(&j)) else {
                continue;
            };
            let overlap = interval_overlap(ti, inst.service(i), tj, inst.service(j));
            if overlap > TIME_TOL {
                out.push(Violation::Overlap { first: i, second: j, overlap });
            }
        }
    }

    let checked = [
        Clause::RobotCount,
        Clause::DepotStart,
        Clause::DepotEnd,
        Clause::NonEmptyRoute,
        Clause::KnownNodes,
        Clause::VisitOnce,
        Clause::ArrivalTimes,
        Clause::Window,
        Clause::ArrivalChain,
        Clause::ReturnDeadline,
        Clause::Objective,
        Clause::NoOverlap,
    ]
    .into_iter()
    .filter(|c| c.applies_to(variant))
    .collect();
    ValidationReport { variant, checked, violations: out }
}

/// Nodes strictly between the depot copies.
fn interior(route: &[usize], sink: usize) -> Vec<usize> {
    let mut nodes: &[usize] = route;
    if nodes.first() == Some(&0) {
        nodes = &nodes[1..];
    }
    if nodes.last() == Some(&sink) {
        nodes = &nodes[..nodes.len() - 1];
    }
    nodes.to_vec()
}
