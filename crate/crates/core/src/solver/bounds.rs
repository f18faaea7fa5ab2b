//! Lower bounds on the travel cost still needed to finish a partial plan.
//!
//! Both bounds drop time windows and collision constraints. The exact one is
//! a Held-Karp table over "giant tours": `F[c][S][j]` is the cheapest walk
//! that leaves the depot, visits exactly `S`, returns to the depot `c` times
//! on the way and stops at `j`. Reading the table backwards prices every
//! completion of a route set exactly when the windows do not bind. Beyond
//! the memory budget the solver falls back to a spanning-tree bound.

use serde::{Deserialize, Serialize};

use crate::instance::Instance;

/// Largest table the solver is willing to allocate.
const TABLE_BYTES_LIMIT: usize = 160 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    HeldKarp,
    SpanningTree,
}

#[derive(Debug, Clone)]
pub struct CompletionBounds {
    v: usize,
    robots: usize,
    idle: bool,
    /// `T` between visit nodes, 0-based.
    t: Vec<f64>,
    /// `T` from the depot to each visit node.
    depot: Vec<f64>,
    table: Option<Table>,
}

#[derive(Debug, Clone)]
struct Table {
    /// `f[(c * 2^v + S) * v + j]`.
    f: Vec<f64>,
    /// `r[c * 2^v + S] = min_j f[c][S][j] + T_j0`, i.e. `c + 1` closed routes.
    r: Vec<f64>,
}

impl CompletionBounds {
    /// Picks the Held-Karp table when it fits in memory.
    pub fn new(inst: &Instance, allow_idle_robots: bool) -> Self {
        let v = inst.v();
        let fits = v < 30
            && inst.robots.checked_mul(v << v).is_some_and(|n| n * std::mem::size_of::<f64>() <= TABLE_BYTES_LIMIT);
        Self::with_kind(inst, allow_idle_robots, if fits { BoundKind::HeldKarp } else { BoundKind::SpanningTree })
    }

    pub fn with_kind(inst: &Instance, allow_idle_robots: bool, kind: BoundKind) -> Self {
        let v = inst.v();
        let mut t = vec![0.0; v * v];
        for i in 0..v {
            for j in 0..v {
                t[i * v + j] = inst.t(i + 1, j + 1);
            }
        }
        let depot = (1..=v).map(|j| inst.t(0, j)).collect();
        let mut bounds = CompletionBounds { v, robots: inst.robots, idle: allow_idle_robots, t, depot, table: None };
        if kind == BoundKind::HeldKarp {
            bounds.table = Some(bounds.build_table());
        }
        bounds
    }

    pub fn kind(&self) -> BoundKind {
        if self.table.is_some() {
            BoundKind::HeldKarp
        } else {
            BoundKind::SpanningTree
        }
    }

    /// Whether this bound was built for `inst`.
    pub fn matches(&self, inst: &Instance, allow_idle_robots: bool) -> bool {
        self.v == inst.v()
            && self.robots == inst.robots
            && self.idle == allow_idle_robots
            && (1..=self.v).all(|j| self.depot[j - 1] == inst.t(0, j))
            && (0..self.v).all(|i| (0..self.v).all(|j| self.t[i * self.v + j] == inst.t(i + 1, j + 1)))
    }

    fn build_table(&self) -> Table {
        let v = self.v;
        let subsets = 1usize << v;
        let inf = f64::INFINITY;
        let mut f = vec![inf; self.robots * subsets * v];
        let mut r = vec![inf; self.robots * subsets];
        for c in 0..self.robots {
            for s in 1..subsets {
                let base = (c * subsets + s) * v;
                let mut bits = s;
                while bits != 0 {
                    let j = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let prev = s ^ (1 << j);
                    let mut best = inf;
                    if prev == 0 {
                        if c == 0 {
                            best = self.depot[j];
                        }
                    } else {
                        let pbase = (c * subsets + prev) * v;
                        let mut pb = prev;
                        while pb != 0 {
                            let i = pb.trailing_zeros() as usize;
                            pb &= pb - 1;
                            let cand = f[pbase + i] + self.t[i * v + j];
                            if cand < best {
                                best = cand;
                            }
                        }
                        if c > 0 {
                            let cand = r[(c - 1) * subsets + prev] + self.depot[j];
                            if cand < best {
                                best = cand;
                            }
                        }
                    }
                    f[base + j] = best;
                }
                let mut closed = inf;
                let mut bits = s;
                while bits != 0 {
                    let j = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    closed = closed.min(f[base + j] + self.depot[j]);
                }
                r[c * subsets + s] = closed;
            }
        }
        Table { f, r }
    }

    /// Cheapest way for `routes` fresh routes to cover `unvisited` (bit
    /// `j - 1` for node `j`).
    pub fn start(&self, unvisited: u64, routes: usize) -> f64 {
        if unvisited == 0 {
            return if routes == 0 || self.idle { 0.0 } else { f64::INFINITY };
        }
        if routes == 0 {
            return f64::INFINITY;
        }
        let count = unvisited.count_ones() as usize;
        match &self.table {
            Some(table) => {
                let subsets = 1usize << self.v;
                let s = unvisited as usize;
                if self.idle {
                    (1..=routes.min(count)).map(|n| table.r[(n - 1) * subsets + s]).fold(f64::INFINITY, f64::min)
                } else if count < routes {
                    f64::INFINITY
                } else {
                    table.r[(routes - 1) * subsets + s]
                }
            }
            None if !self.idle && count < routes => f64::INFINITY,
            None => self.spanning_tree(None, unvisited),
        }
    }

    /// Cheapest completion when the current route stands at `last` (a visit
    /// node) and `routes` more routes follow.
    pub fn extend(&self, last: usize, unvisited: u64, routes: usize) -> f64 {
        let home = self.depot[last - 1];
        if unvisited == 0 {
            return home + self.start(0, routes);
        }
        let Some(table) = &self.table else {
            if !self.idle && (unvisited.count_ones() as usize) < routes {
                return f64::INFINITY;
            }
            return self.spanning_tree(Some(last - 1), unvisited);
        };
        let v = self.v;
        let subsets = 1usize << v;
        let s = unvisited as usize;
        // close now, then cover everything with the remaining routes
        let mut best = home + self.start(unvisited, routes);
        let lowest = if self.idle { 0 } else { routes };
        for c in lowest..=routes {
            let base = (c * subsets + s) * v;
            let mut bits = s;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                best = best.min(table.f[base + j] + self.t[j * v + last - 1]);
            }
        }
        best
    }

    /// Prim's tree over the depot, `anchor` (0-based) and `unvisited`. Any
    /// completion connects all of them, so its cost is at least the tree's.
    fn spanning_tree(&self, anchor: Option<usize>, unvisited: u64) -> f64 {
        let v = self.v;
        let mut members: Vec<usize> = (0..v).filter(|&j| unvisited & (1 << j) != 0).collect();
        if let Some(a) = anchor {
            members.push(a);
        }
        // index `v` stands for the depot
        let dist = |a: usize, b: usize| -> f64 {
            match (a == v, b == v) {
                (true, true) => 0.0,
                (true, false) => self.depot[b],
                (false, true) => self.depot[a],
                (false, false) => self.t[a * v + b],
            }
        };
        let mut key: Vec<f64> = members.iter().map(|&m| dist(v, m)).collect();
        let mut done = vec![false; members.len()];
        let mut total = 0.0;
        for _ in 0..members.len() {
            let mut pick = usize::MAX;
            for (n, &d) in key.iter().enumerate() {
                if !done[n] && (pick == usize::MAX || d < key[pick]) {
                    pick = n;
                }
            }
            done[pick] = true;
            total += key[pick];
            for n in 0..members.len() {
                if !done[n] {
                    key[n] = key[n].min(dist(members[pick], members[n]));
                }
            }
        }
        total
    }
}
