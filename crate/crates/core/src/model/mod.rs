//! Mixed-integer linear models of the routing problem.
//!
//! Variables follow the routing graph with a duplicated depot: `x_i_j_k`
//! says robot `k` drives arc `(i, j)`, `t_i` is the arrival time at visit node
//! `i`, and (collision-aware variant only) `z_i_j` says collision node `i` is
//! served before its partner `j`. Arrival times are pinned exactly by the
//! two-sided arrival rows, so robots never idle at a node.

mod fixed;
mod lp;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::TIME_TOL;

pub use fixed::completes;
pub use lp::export_lp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Collision-unaware.
    Cua,
    /// Collision-aware.
    Ca,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Cua => f.write_str("MP-CUA"),
            Variant::Ca => f.write_str("MP-CA"),
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cua" | "mp-cua" => Ok(Variant::Cua),
            "ca" | "mp-ca" => Ok(Variant::Ca),
            other => Err(Error::Parameter(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarRole {
    /// Robot `robot` (1-based) drives `from -> to`.
    Arc {
        from: usize,
        to: usize,
        robot: usize,
    },
    Arrival {
        node: usize,
    },
    /// `first` is served before `second`.
    Order {
        first: usize,
        second: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub role: VarRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// Constraint families, one per row template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Every robot leaves the depot once.
    DepartDepot,
    /// Every robot returns to the depot once.
    ReturnDepot,
    /// Every visit node is entered once.
    VisitOnce,
    /// In-flow equals out-flow per robot and node.
    FlowBalance,
    /// First arrival no earlier than direct travel from the depot.
    FirstArrivalLower,
    /// Arrival after predecessor service and travel.
    Precedence,
    /// Back at the depot by its closing time.
    ReturnDeadline,
    /// First arrival no later than direct travel from the depot.
    FirstArrivalUpper,
    /// Arrival no later than predecessor service and travel.
    ArrivalUpper,
    /// `e_i <= t_i` and `t_i <= l_i`.
    Window,
    /// Number of orientation variables set equals the number of pairs.
    CollisionCount,
    /// Exactly one orientation per collision pair.
    CollisionOrder,
    /// Occupancy intervals of a collision pair do not overlap.
    NonOverlap,
}

impl Family {
    pub const ALL: [Family; 13] = [
        Family::DepartDepot,
        Family::ReturnDepot,
        Family::VisitOnce,
        Family::FlowBalance,
        Family::FirstArrivalLower,
        Family::Precedence,
        Family::ReturnDeadline,
        Family::FirstArrivalUpper,
        Family::ArrivalUpper,
        Family::Window,
        Family::CollisionCount,
        Family::CollisionOrder,
        Family::NonOverlap,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Family::DepartDepot => "depart",
            Family::ReturnDepot => "return",
            Family::VisitOnce => "visit",
            Family::FlowBalance => "flow",
            Family::FirstArrivalLower => "first_lo",
            Family::Precedence => "prec",
            Family::ReturnDeadline => "deadline",
            Family::FirstArrivalUpper => "first_up",
            Family::ArrivalUpper => "arrive_up",
            Family::Window => "window",
            Family::CollisionCount => "ccount",
            Family::CollisionOrder => "corder",
            Family::NonOverlap => "nonoverlap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub family: Family,
    /// `(variable index, coefficient)`, no duplicates.
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn lhs(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v]).sum()
    }

    /// Amount by which `values` violates the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.lhs(values);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Big-M constant for the conditional rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigM {
    pub value: f64,
}

/// `l_0 + max w_i + max T_ij`: the smallest uniform constant that switches
/// off every conditional time row.
pub fn big_m_value(instance: &Instance) -> BigM {
    let max_w = instance.nodes.nodes.iter().map(|n| n.service).fold(0.0, f64::max);
    BigM { value: instance.horizon() + max_w + instance.travel().max() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BigMMode {
    /// One constant for every row.
    #[default]
    Uniform,
    /// Each row gets the smallest constant its variable bounds allow.
    PerConstraint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelOptions {
    /// Remove arcs no feasible schedule can use.
    pub prune_arcs: bool,
    /// Allow the direct depot arc `0 -> v+1`, i.e. idle robots.
    pub allow_idle_robots: bool,
    pub big_m: BigMMode,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions { prune_arcs: true, allow_idle_robots: false, big_m: BigMMode::Uniform }
    }
}

/// Problems visible before any search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    /// Driving straight from the depot misses the node's window.
    DirectTravelMissesWindow { node: usize, arrival: f64, earliest: f64, latest: f64 },
    /// No arc into the node survived pruning.
    Unreachable { node: usize },
    /// Every robot must serve at least one node.
    TooFewNodes { nodes: usize, robots: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelStats {
    pub variant: Variant,
    pub binary_variables: usize,
    pub continuous_variables: usize,
    pub arc_variables: usize,
    pub arrival_variables: usize,
    pub order_variables: usize,
    pub constraints: BTreeMap<Family, usize>,
    pub total_constraints: usize,
    pub redundant_families: Vec<Family>,
}

/// A built model. Immutable after construction.
#[derive(Debug, Clone)]
pub struct MilpModel {
    pub variant: Variant,
    pub options: ModelOptions,
    pub big_m: BigM,
    pub variables: Vec<Variable>,
    /// Minimised.
    pub objective: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
    pub diagnostics: Vec<Diagnostic>,
    /// Families emitted although implied by others.
    pub redundant: Vec<Family>,
    pub instance_digest: String,
    instance: Arc<Instance>,
    /// Dense `[k][i][j]` lookup of arc variables.
    arc_index: Vec<Option<usize>>,
    arrival_index: Vec<usize>,
    order_index: BTreeMap<(usize, usize), usize>,
}

pub fn build_mp_cua(instance: &Instance) -> MilpModel {
    build(instance, Variant::Cua, ModelOptions::default())
}

pub fn build_mp_ca(instance: &Instance) -> MilpModel {
    build(instance, Variant::Ca, ModelOptions::default())
}

pub fn build_model(instance: &Instance, variant: Variant) -> MilpModel {
    build(instance, variant, ModelOptions::default())
}

/// Lowest possible arrival time at `i` under no-wait semantics.
fn earliest_arrival(inst: &Instance, i: usize) -> f64 {
    if i == 0 {
        inst.e0()
    } else {
        inst.node(i).earliest.max(inst.e0() + inst.t(0, i))
    }
}

/// Whether arc `(i, j)` can appear in some schedule. Only used for pruning;
/// every test is a relaxation, so no feasible schedule loses an arc.
pub fn arc_survives(inst: &Instance, i: usize, j: usize) -> bool {
    let sink = inst.sink();
    let depart = earliest_arrival(inst, i) + inst.service(i);
    if j == sink {
        return depart + inst.t(i, j) <= inst.horizon() + TIME_TOL;
    }
    let node = inst.node(j);
    if depart + inst.t(i, j) > node.latest + TIME_TOL {
        return false;
    }
    // no waiting: the arrival at j is at most the latest departure from i
    let latest_depart = if i == 0 { inst.e0() } else { inst.node(i).latest + inst.service(i) };
    latest_depart + inst.t(i, j) >= node.earliest - TIME_TOL
}

impl MilpModel {
    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn shared_instance(&self) -> Arc<Instance> {
        Arc::clone(&self.instance)
    }

    pub fn robots(&self) -> usize {
        self.instance.robots
    }

    fn arc_slot(&self, i: usize, j: usize, k: usize) -> usize {
        let n = self.instance.v() + 2;
        ((k - 1) * n + i) * n + j
    }

    /// Variable of `x_i_j_k`, robot `k` 1-based.
    pub fn arc_var(&self, i: usize, j: usize, k: usize) -> Option<usize> {
        let n = self.instance.v() + 2;
        if i >= n || j >= n || k == 0 || k > self.instance.robots {
            return None;
        }
        self.arc_index[self.arc_slot(i, j, k)]
    }

    /// Arcs are identical for every robot.
    pub fn arc_allowed(&self, i: usize, j: usize) -> bool {
        self.arc_var(i, j, 1).is_some()
    }

    pub fn arrival_var(&self, node: usize) -> usize {
        self.arrival_index[node - 1]
    }

    pub fn order_var(&self, first: usize, second: usize) -> Option<usize> {
        self.order_index.get(&(first, second)).copied()
    }

    pub fn variable_by_name(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v]).sum()
    }

    /// Rows violated by more than `tol`, with their violation.
    pub fn violations(&self, values: &[f64], tol: f64) -> Vec<(&Constraint, f64)> {
        self.constraints.iter().map(|c| (c, c.violation(values))).filter(|(_, v)| *v > tol).collect()
    }

    /// Worst violation over rows, variable bounds and integrality.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| c.violation(values)).fold(0.0, f64::max);
        let bounds = self
            .variables
            .iter()
            .zip(values)
            .map(|(var, &x)| {
                let b = (var.lower - x).max(x - var.upper).max(0.0);
                let frac = match var.kind {
                    VarKind::Binary => (x - x.round()).abs(),
                    VarKind::Continuous => 0.0,
                };
                b.max(frac)
            })
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    pub fn stats(&self) -> ModelStats {
        let mut constraints: BTreeMap<Family, usize> = BTreeMap::new();
        for c in &self.constraints {
            *constraints.entry(c.family).or_default() += 1;
        }
        let count = |f: &dyn Fn(&VarRole) -> bool| self.variables.iter().filter(|v| f(&v.role)).count();
        ModelStats {
            variant: self.variant,
            binary_variables: self.variables.iter().filter(|v| v.kind == VarKind::Binary).count(),
            continuous_variables: self.variables.iter().filter(|v| v.kind == VarKind::Continuous).count(),
            arc_variables: count(&|r| matches!(r, VarRole::Arc { .. })),
            arrival_variables: count(&|r| matches!(r, VarRole::Arrival { .. })),
            order_variables: count(&|r| matches!(r, VarRole::Order { .. })),
            total_constraints: self.constraints.len(),
            constraints,
            redundant_families: self.redundant.clone(),
        }
    }
}

struct Builder {
    m: f64,
    mode: BigMMode,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
}

impl Builder {
    fn var(&mut self, name: String, kind: VarKind, lower: f64, upper: f64, role: VarRole) -> usize {
        self.variables.push(Variable { name, kind, lower, upper, role });
        self.variables.len() - 1
    }

    fn row(&mut self, family: Family, name: String, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (v, c) in terms {
            match merged.iter_mut().find(|(w, _)| *w == v) {
                Some(t) => t.1 += c,
                None => merged.push((v, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0.0);
        self.constraints.push(Constraint { name, family, terms: merged, relation, rhs });
    }

    /// Big-M for a row, given the tight value its bounds would allow.
    fn m(&self, tight: f64) -> f64 {
        match self.mode {
            BigMMode::Uniform => self.m,
            BigMMode::PerConstraint => tight.max(0.0),
        }
    }
}

pub fn build(instance: &Instance, variant: Variant, options: ModelOptions) -> MilpModel {
    let inst = instance;
    let v = inst.v();
    let n = v + 2;
    let sink = v + 1;
    let robots = inst.robots;
    let big_m = big_m_value(inst);
    let mut b = Builder { m: big_m.value, mode: options.big_m, variables: Vec::new(), constraints: Vec::new() };

    let mut allowed = vec![false; n * n];
    for i in 0..=v {
        for j in 1..=sink {
            if i == j || (i == 0 && j == sink && !options.allow_idle_robots) {
                continue;
            }
            let keep = (i == 0 && j == sink) || !options.prune_arcs || arc_survives(inst, i, j);
            allowed[i * n + j] = keep;
        }
    }

    let mut arc_index = vec![None; robots * n * n];
    let mut objective = Vec::new();
    for k in 1..=robots {
        for i in 0..=v {
            for j in 1..=sink {
                if allowed[i * n + j] {
                    let id = b.var(
                        format!("x_{i}_{j}_{k}"),
                        VarKind::Binary,
                        0.0,
                        1.0,
                        VarRole::Arc { from: i, to: j, robot: k },
                    );
                    arc_index[((k - 1) * n + i) * n + j] = Some(id);
                    objective.push((id, inst.t(i, j)));
                }
            }
        }
    }
    let arc = |i: usize, j: usize, k: usize| arc_index[((k - 1) * n + i) * n + j];
    let arrival_index: Vec<usize> = (1..=v)
        .map(|i| b.var(format!("t_{i}"), VarKind::Continuous, 0.0, inst.horizon(), VarRole::Arrival { node: i }))
        .collect();
    let t = |i: usize| arrival_index[i - 1];

    let mut order_index = BTreeMap::new();
    if variant == Variant::Ca {
        for (i, j) in inst.collisions.pairs() {
            for (a, c) in [(i, j), (j, i)] {
                let id = b.var(format!("z_{a}_{c}"), VarKind::Binary, 0.0, 1.0, VarRole::Order { first: a, second: c });
                order_index.insert((a, c), id);
            }
        }
    }

    let ones =
        |vars: Vec<Option<usize>>| -> Vec<(usize, f64)> { vars.into_iter().flatten().map(|x| (x, 1.0)).collect() };

    for k in 1..=robots {
        let mut out: Vec<Option<usize>> = (1..=v).map(|j| arc(0, j, k)).collect();
        let mut back: Vec<Option<usize>> = (1..=v).map(|i| arc(i, sink, k)).collect();
        if options.allow_idle_robots {
            out.push(arc(0, sink, k));
            back.push(arc(0, sink, k));
        }
        b.row(Family::DepartDepot, format!("depart_{k}"), ones(out), Relation::Eq, 1.0);
        b.row(Family::ReturnDepot, format!("return_{k}"), ones(back), Relation::Eq, 1.0);
    }
    for j in 1..=v {
        let into = (1..=robots)
            .flat_map(|k| (0..=v).map(move |i| (i, k)))
            .map(|(i, k)| if i == j { None } else { arc(i, j, k) })
            .collect();
        b.row(Family::VisitOnce, format!("visit_{j}"), ones(into), Relation::Eq, 1.0);
    }
    for k in 1..=robots {
        for j in 0..=sink {
            let mut terms = Vec::new();
            if j == 0 || j == sink {
                // the two depot copies balance each other
                terms.extend((0..=v).filter_map(|i| arc(i, sink, k)).map(|x| (x, 1.0)));
                terms.extend((1..=sink).filter_map(|h| arc(0, h, k)).map(|x| (x, -1.0)));
            } else {
                terms.extend((0..=v).filter(|&i| i != j).filter_map(|i| arc(i, j, k)).map(|x| (x, 1.0)));
                terms.extend((1..=sink).filter(|&h| h != j).filter_map(|h| arc(j, h, k)).map(|x| (x, -1.0)));
            }
            b.row(Family::FlowBalance, format!("flow_{j}_{k}"), terms, Relation::Eq, 0.0);
        }
    }

    let e0 = inst.e0();
    let l0 = inst.horizon();
    let window = |i: usize| (inst.node(i).earliest, inst.node(i).latest);
    for k in 1..=robots {
        for i in 1..=v {
            if let Some(x) = arc(0, i, k) {
                let direct = e0 + inst.t(0, i);
                let (ei, li) = window(i);
                // t_i - M x >= e0 + T0i - M
                let m = b.m(direct - ei);
                b.row(
                    Family::FirstArrivalLower,
                    format!("first_lo_{i}_{k}"),
                    vec![(t(i), 1.0), (x, -m)],
                    Relation::Ge,
                    direct - m,
                );
                // t_i + M x <= e0 + T0i + M
                let m = b.m(li - direct);
                b.row(
                    Family::FirstArrivalUpper,
                    format!("first_up_{i}_{k}"),
                    vec![(t(i), 1.0), (x, m)],
                    Relation::Le,
                    direct + m,
                );
            }
        }
    }
    for k in 1..=robots {
        for i in 1..=v {
            for j in 1..=v {
                if i == j {
                    continue;
                }
                if let Some(x) = arc(i, j, k) {
                    let (_, li) = window(i);
                    let (ej, _) = window(j);
                    let gap = inst.service(i) + inst.t(i, j);
                    // t_i - t_j + M x <= M - w_i - T_ij
                    let m = b.m(li - ej + gap);
                    b.row(
                        Family::Precedence,
                        format!("prec_{i}_{j}_{k}"),
                        vec![(t(i), 1.0), (t(j), -1.0), (x, m)],
                        Relation::Le,
                        m - gap,
                    );
                }
            }
        }
    }
    for k in 1..=robots {
        for i in 1..=v {
            if let Some(x) = arc(i, sink, k) {
                let (_, li) = window(i);
                let tail = inst.service(i) + inst.t(i, sink);
                // t_i + (M - l0) x <= M - w_i - T_i,sink
                let m = b.m(li + tail);
                b.row(
                    Family::ReturnDeadline,
                    format!("deadline_{i}_{k}"),
                    vec![(t(i), 1.0), (x, m - l0)],
                    Relation::Le,
                    m - tail,
                );
            }
        }
    }
    for i in 1..=v {
        for j in 1..=v {
            if i == j {
                continue;
            }
            let xs: Vec<usize> = (1..=robots).filter_map(|k| arc(i, j, k)).collect();
            if xs.is_empty() {
                continue;
            }
            let (ei, _) = window(i);
            let (_, lj) = window(j);
            let gap = inst.service(i) + inst.t(i, j);
            // t_j - t_i + M sum_k x <= w_i + T_ij + M
            let m = b.m(lj - ei - gap);
            let mut terms = vec![(t(j), 1.0), (t(i), -1.0)];
            terms.extend(xs.into_iter().map(|x| (x, m)));
            b.row(Family::ArrivalUpper, format!("arrive_up_{i}_{j}"), terms, Relation::Le, gap + m);
        }
    }
    for i in 1..=v {
        let (ei, li) = window(i);
        b.row(Family::Window, format!("window_lo_{i}"), vec![(t(i), 1.0)], Relation::Ge, ei);
        b.row(Family::Window, format!("window_up_{i}"), vec![(t(i), 1.0)], Relation::Le, li);
    }

    let mut redundant = Vec::new();
    if variant == Variant::Ca && inst.collisions.pair_count() > 0 {
        let all: Vec<(usize, f64)> = order_index.values().map(|&z| (z, 1.0)).collect();
        b.row(Family::CollisionCount, "ccount".into(), all, Relation::Eq, inst.collisions.pair_count() as f64);
        redundant.push(Family::CollisionCount);
        for (i, j) in inst.collisions.pairs() {
            let terms = vec![(order_index[&(i, j)], 1.0), (order_index[&(j, i)], 1.0)];
            b.row(Family::CollisionOrder, format!("corder_{i}_{j}"), terms, Relation::Eq, 1.0);
        }
        for (i, j) in inst.collisions.pairs() {
            for (a, c) in [(i, j), (j, i)] {
                let (_, la) = window(a);
                let (ec, _) = window(c);
                let wa = inst.service(a);
                // t_a - t_c + M z_ac <= M - w_a
                let m = b.m(la - ec + wa);
                let terms = vec![(t(a), 1.0), (t(c), -1.0), (order_index[&(a, c)], m)];
                b.row(Family::NonOverlap, format!("nonoverlap_{a}_{c}"), terms, Relation::Le, m - wa);
            }
        }
    }

    let mut diagnostics = Vec::new();
    for i in 1..=v {
        let direct = e0 + inst.t(0, i);
        let (ei, li) = window(i);
        if direct > li + TIME_TOL {
            diagnostics.push(Diagnostic::DirectTravelMissesWindow {
                node: i,
                arrival: direct,
                earliest: ei,
                latest: li,
            });
        }
        if !(0..=v).any(|h| h != i && allowed[h * n + i]) {
            diagnostics.push(Diagnostic::Unreachable { node: i });
        }
    }
    if v < robots && !options.allow_idle_robots {
        diagnostics.push(Diagnostic::TooFewNodes { nodes: v, robots });
    }

    MilpModel {
        variant,
        options,
        big_m,
        variables: b.variables,
        objective,
        constraints: b.constraints,
        diagnostics,
        redundant,
        instance_digest: inst.digest(),
        instance: Arc::new(inst.clone()),
        arc_index,
        arrival_index,
        order_index,
    }
}
