//! Exhaustive enumeration, used as an oracle for the branch and bound.

use super::{arrival_chain, interval_overlap, objective_eps, Solution, SolveStatus};
use crate::instance::Instance;
use crate::model::Variant;
use crate::TIME_TOL;

pub const BRUTE_FORCE_MAX_NODES: usize = 9;
pub const BRUTE_FORCE_MAX_ROBOTS: usize = 3;

pub fn brute_force(inst: &Instance, variant: Variant) -> Solution {
    brute_force_with(inst, variant, false)
}

/// Tries every ordering of the visit nodes cut into one block per robot.
/// Works straight from the instance, without the model or its pruning.
pub fn brute_force_with(inst: &Instance, variant: Variant, allow_idle_robots: bool) -> Solution {
    let v = inst.v();
    let k = inst.robots;
    if v > BRUTE_FORCE_MAX_NODES || k > BRUTE_FORCE_MAX_ROBOTS {
        let hint =
            format!("brute force handles at most {BRUTE_FORCE_MAX_NODES} nodes and {BRUTE_FORCE_MAX_ROBOTS} robots");
        return Solution::without_schedule(inst, variant, SolveStatus::NoSolution, Some(hint));
    }
    let mut perm: Vec<usize> = (1..=v).collect();
    let mut cuts = vec![0usize; k + 1];
    let mut best: Option<(f64, Vec<Vec<usize>>)> = None;
    loop {
        cuts[0] = 0;
        cuts[k] = v;
        each_cut(&mut cuts, 1, k, v, &mut |cuts| {
            let routes: Vec<Vec<usize>> = cuts.windows(2).map(|c| perm[c[0]..c[1]].to_vec()).collect();
            if !is_canonical(&routes, allow_idle_robots) {
                return;
            }
            let Some(cost) = evaluate(inst, variant, &routes) else { return };
            let take = match &best {
                None => true,
                Some((b, r)) => {
                    let eps = objective_eps(*b);
                    cost < b - eps || (cost <= b + eps && routes < *r)
                }
            };
            if take {
                best = Some((cost, routes));
            }
        });
        if !next_permutation(&mut perm) {
            break;
        }
    }
    match best {
        Some((_, routes)) => {
            let mut sol = Solution::from_routes(inst, variant, SolveStatus::Optimal, &routes);
            sol.lower_bound = sol.objective;
            sol.gap = Some(0.0);
            sol
        }
        None => Solution::without_schedule(inst, variant, SolveStatus::Infeasible, Some("no route set passes".into())),
    }
}

/// Non-decreasing cut positions `cuts[1..k]`.
fn each_cut(cuts: &mut Vec<usize>, at: usize, k: usize, v: usize, f: &mut impl FnMut(&[usize])) {
    if at == k {
        f(cuts);
        return;
    }
    for c in cuts[at - 1]..=v {
        cuts[at] = c;
        each_cut(cuts, at + 1, k, v, f);
    }
}

/// Nonempty routes ordered by first node, empty ones (if allowed) last.
fn is_canonical(routes: &[Vec<usize>], idle: bool) -> bool {
    let mut prev_first = 0;
    let mut seen_empty = false;
    for r in routes {
        match r.first() {
            None if idle => seen_empty = true,
            None => return false,
            Some(&f) => {
                if seen_empty || f <= prev_first {
                    return false;
                }
                prev_first = f;
            }
        }
    }
    true
}

/// Travel time of a route set, or `None` when it breaks a rule.
fn evaluate(inst: &Instance, variant: Variant, routes: &[Vec<usize>]) -> Option<f64> {
    let mut times = vec![0.0; inst.v() + 1];
    let mut cost = 0.0;
    let sink = inst.sink();
    for route in routes {
        let Some(&last) = route.last() else { continue };
        let chain = arrival_chain(inst, route);
        for (&node, &t) in route.iter().zip(&chain) {
            let w = inst.node(node);
            if t < w.earliest - TIME_TOL || t > w.latest + TIME_TOL {
                return None;
            }
            times[node] = t;
        }
        let home = chain[chain.len() - 1] + inst.service(last) + inst.t(last, sink);
        if home > inst.horizon() + TIME_TOL {
            return None;
        }
        let mut prev = 0;
        for &node in route {
            cost += inst.t(prev, node);
            prev = node;
        }
        cost += inst.t(last, sink);
    }
    if variant == Variant::Ca {
        for (i, j) in inst.collisions.pairs() {
            if interval_overlap(times[i], inst.service(i), times[j], inst.service(j)) > TIME_TOL {
                return None;
            }
        }
    }
    Some(cost)
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
