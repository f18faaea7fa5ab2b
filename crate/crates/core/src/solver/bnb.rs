//! Depth-first branch and bound over route sets.
//!
//! Routes are grown one at a time, each node by node. Robots are
//! interchangeable, so routes are kept in increasing order of their first
//! node. A partial plan is discarded once its travel so far plus the
//! completion bound exceeds the incumbent; ties are kept so the
//! lexicographically smallest optimal route set wins.

use std::time::Instant;

use log::debug;

use super::bounds::CompletionBounds;
use super::heuristic::nearest_feasible_neighbor;
use super::{canonical, interval_overlap, objective_eps, Solution, SolveLimits, SolveStatus, TracePoint};
use crate::instance::Instance;
use crate::model::{Diagnostic, MilpModel, Variant};
use crate::TIME_TOL;

/// Nodes between wall-clock checks.
const CLOCK_STRIDE: u64 = 1024;

pub fn solve(model: &MilpModel, limits: &SolveLimits) -> Solution {
    solve_with(model, limits, None)
}

/// Like [`solve`], reusing completion bounds computed for the same instance
/// (they do not depend on the variant).
pub fn solve_with(model: &MilpModel, limits: &SolveLimits, bounds: Option<&CompletionBounds>) -> Solution {
    let started = Instant::now();
    let inst = model.instance();
    let idle = model.options.allow_idle_robots;
    if inst.v() > 63 {
        let mut sol = Solution::without_schedule(inst, model.variant, SolveStatus::NoSolution, None);
        sol.hint = Some("more than 63 visit nodes; export the model and use an external solver".into());
        return sol;
    }
    let owned;
    let bounds = match bounds {
        Some(b) if b.matches(inst, idle) => b,
        _ => {
            owned = CompletionBounds::new(inst, idle);
            &owned
        }
    };

    let mut search = Search::new(model, bounds, *limits, started);
    let all = if inst.v() == 63 { u64::MAX >> 1 } else { (1u64 << inst.v()) - 1 };
    let root = bounds.start(all, inst.robots);
    search.stats_root = root;
    if let Some((cost, routes)) = nearest_feasible_neighbor(model) {
        search.warm = Some(cost);
        search.offer(cost, routes);
    }
    if root.is_finite() {
        search.unvisited = all;
        search.routes.push(Vec::new());
        search.dfs(root);
    }
    debug!("{} explored {} nodes in {:?}", model.variant, search.nodes, started.elapsed());
    search.finish(model, root)
}

struct Search<'a> {
    inst: &'a Instance,
    model: &'a MilpModel,
    bounds: &'a CompletionBounds,
    limits: SolveLimits,
    started: Instant,
    collision_aware: bool,
    idle: bool,
    partners: Vec<Vec<usize>>,

    routes: Vec<Vec<usize>>,
    times: Vec<Option<f64>>,
    unvisited: u64,
    cost: f64,

    nodes: u64,
    aborted: bool,
    /// Smallest bound among subtrees left unexplored after an abort.
    open_bound: f64,
    best: Option<(f64, Vec<Vec<usize>>)>,
    warm: Option<f64>,
    stats_root: f64,
    trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, Copy)]
enum Move {
    Visit { node: usize, time: f64 },
    Close,
}

impl<'a> Search<'a> {
    fn new(model: &'a MilpModel, bounds: &'a CompletionBounds, limits: SolveLimits, started: Instant) -> Self {
        let inst = model.instance();
        let collision_aware = model.variant == Variant::Ca;
        let partners = (0..=inst.v())
            .map(|i| if i == 0 || !collision_aware { Vec::new() } else { inst.collisions.partners(i).collect() })
            .collect();
        Search {
            inst,
            model,
            bounds,
            limits,
            started,
            collision_aware,
            idle: model.options.allow_idle_robots,
            partners,
            routes: Vec::with_capacity(inst.robots),
            times: vec![None; inst.v() + 1],
            unvisited: 0,
            cost: 0.0,
            nodes: 0,
            aborted: false,
            open_bound: f64::INFINITY,
            best: None,
            warm: None,
            stats_root: f64::INFINITY,
            trace: Vec::new(),
        }
    }

    fn prunable(&self, bound: f64) -> bool {
        match &self.best {
            None => false,
            Some((best, _)) => {
                let slack = if self.limits.gap_tolerance > super::OBJECTIVE_TOL {
                    self.limits.gap_tolerance * best.abs()
                } else {
                    0.0
                };
                bound > best + objective_eps(*best) - slack
            }
        }
    }

    fn offer(&mut self, total: f64, routes: Vec<Vec<usize>>) {
        let routes = canonical(routes);
        let better = match &self.best {
            None => true,
            Some((best, incumbent)) => {
                let eps = objective_eps(*best);
                total < best - eps || (total <= best + eps && routes < *incumbent)
            }
        };
        if better {
            let improved = self.best.as_ref().is_none_or(|(b, _)| total < *b);
            self.best = Some((total, routes));
            if improved {
                self.trace.push(TracePoint { nodes: self.nodes, incumbent: Some(total), lower_bound: self.stats_root });
            }
        }
    }

    fn conflicts(&self, node: usize, time: f64) -> bool {
        let w = self.inst.service(node);
        self.partners[node]
            .iter()
            .any(|&p| self.times[p].is_some_and(|tp| interval_overlap(time, w, tp, self.inst.service(p)) > TIME_TOL))
    }

    fn out_of_budget(&mut self) -> bool {
        if self.nodes >= self.limits.node_limit {
            return true;
        }
        self.nodes.is_multiple_of(CLOCK_STRIDE) && self.started.elapsed().as_secs_f64() > self.limits.time_limit
    }

    fn dfs(&mut self, bound: f64) {
        if self.aborted {
            self.open_bound = self.open_bound.min(bound);
            return;
        }
        self.nodes += 1;
        if self.out_of_budget() {
            self.aborted = true;
            self.open_bound = self.open_bound.min(bound);
            return;
        }
        let inst = self.inst;
        let r = self.routes.len() - 1;
        let remaining_routes = inst.robots - 1 - r;
        let last = self.routes[r].last().copied().unwrap_or(0);

        if last == 0 && self.unvisited == 0 {
            if self.idle {
                let mut routes = self.routes.clone();
                routes.resize(inst.robots, Vec::new());
                self.offer(self.cost, routes);
            }
            return;
        }

        let mut moves: Vec<(f64, Move)> = Vec::new();
        let previous_first = if r == 0 { 0 } else { self.routes[r - 1][0] };
        let mut bits = self.unvisited;
        while bits != 0 {
            let node = bits.trailing_zeros() as usize + 1;
            bits &= bits - 1;
            if last == 0 && node <= previous_first {
                continue;
            }
            if !self.model.arc_allowed(last, node) {
                continue;
            }
            let time = match self.times[last] {
                Some(t) => t + inst.service(last) + inst.t(last, node),
                None => inst.e0() + inst.t(0, node),
            };
            let window = inst.node(node);
            if time < window.earliest - TIME_TOL || time > window.latest + TIME_TOL {
                continue;
            }
            if self.collision_aware && self.conflicts(node, time) {
                continue;
            }
            let rest = self.unvisited & !(1u64 << (node - 1));
            let b = self.cost + inst.t(last, node) + self.bounds.extend(node, rest, remaining_routes);
            if b.is_finite() && !self.prunable(b) {
                moves.push((b, Move::Visit { node, time }));
            }
        }
        if last != 0 {
            let sink = inst.sink();
            let back = inst.t(last, sink);
            let home = self.times[last].expect("scheduled") + inst.service(last) + back;
            if self.model.arc_allowed(last, sink) && home <= inst.horizon() + TIME_TOL {
                if remaining_routes == 0 {
                    if self.unvisited == 0 {
                        let routes = self.routes.clone();
                        self.offer(self.cost + back, routes);
                    }
                } else {
                    let b = self.cost + back + self.bounds.start(self.unvisited, remaining_routes);
                    if b.is_finite() && !self.prunable(b) {
                        moves.push((b, Move::Close));
                    }
                }
            }
        }
        moves.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| key(&a.1).cmp(&key(&b.1))));

        for (b, mv) in moves {
            if self.aborted {
                self.open_bound = self.open_bound.min(b);
                continue;
            }
            if self.prunable(b) {
                continue;
            }
            match mv {
                Move::Visit { node, time } => {
                    let step = inst.t(last, node);
                    self.routes[r].push(node);
                    self.times[node] = Some(time);
                    self.unvisited &= !(1u64 << (node - 1));
                    self.cost += step;
                    self.dfs(b);
                    self.cost -= step;
                    self.unvisited |= 1u64 << (node - 1);
                    self.times[node] = None;
                    self.routes[r].pop();
                }
                Move::Close => {
                    let step = inst.t(last, inst.sink());
                    self.routes.push(Vec::new());
                    self.cost += step;
                    self.dfs(b);
                    self.cost -= step;
                    self.routes.pop();
                }
            }
        }
    }

    fn finish(self, model: &MilpModel, root: f64) -> Solution {
        let inst = self.inst;
        let elapsed = self.started.elapsed().as_secs_f64();
        let mut trace = self.trace;
        let mut sol = match self.best {
            Some((total, routes)) => {
                let status = if self.aborted { SolveStatus::Feasible } else { SolveStatus::Optimal };
                let mut sol = Solution::from_routes(inst, model.variant, status, &routes);
                let lower = if self.aborted { root.max(self.open_bound.min(total)).min(total) } else { total };
                sol.lower_bound = Some(lower);
                sol.gap = Some(((total - lower) / total.abs().max(f64::MIN_POSITIVE)).max(0.0));
                trace.push(TracePoint { nodes: self.nodes, incumbent: Some(total), lower_bound: lower });
                if let Ok(values) = sol.to_values(model) {
                    sol.stats.max_row_violation = Some(model.max_violation(&values));
                }
                sol
            }
            None if self.aborted => {
                let mut sol = Solution::without_schedule(inst, model.variant, SolveStatus::NoSolution, None);
                sol.lower_bound = Some(root.max(self.open_bound));
                sol
            }
            None => Solution::without_schedule(
                inst,
                model.variant,
                SolveStatus::Infeasible,
                Some(infeasibility_hint(model)),
            ),
        };
        sol.stats.nodes = self.nodes;
        sol.stats.elapsed_seconds = elapsed;
        sol.stats.bound = Some(self.bounds.kind());
        sol.stats.root_bound = root.is_finite().then_some(root);
        sol.stats.warm_start = self.warm;
        sol.stats.trace = trace;
        sol
    }
}

fn key(m: &Move) -> usize {
    match m {
        Move::Visit { node, .. } => *node,
        Move::Close => usize::MAX,
    }
}

fn infeasibility_hint(model: &MilpModel) -> String {
    let inst = model.instance();
    if let Some(d) = model.diagnostics.first() {
        return match d {
            Diagnostic::DirectTravelMissesWindow { node, arrival, latest, .. } => {
                format!("node {node} closes at {latest} s but the earliest possible arrival is {arrival} s")
            }
            Diagnostic::Unreachable { node } => format!("no arc into node {node} is compatible with the windows"),
            Diagnostic::TooFewNodes { nodes, robots } => {
                format!("{robots} robots must each serve a node but there are only {nodes} nodes")
            }
        };
    }
    if model.variant == Variant::Ca && inst.collisions.pair_count() > 0 {
        "the windows force some collision pair to be served at overlapping times".into()
    } else {
        "the time windows admit no route set".into()
    }
}
