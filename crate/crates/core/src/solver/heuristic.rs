//! Greedy warm start.

use super::{canonical, interval_overlap};
use crate::model::{MilpModel, Variant};
use crate::TIME_TOL;

/// Builds routes one after another, always driving to the nearest node that
/// keeps windows, the return deadline and (for the collision-aware model)
/// non-overlap intact. Each route takes at most its fair share of the nodes
/// still open so later robots are not starved. Returns `None` when the
/// greedy choice dead-ends.
pub fn nearest_feasible_neighbor(model: &MilpModel) -> Option<(f64, Vec<Vec<usize>>)> {
    let inst = model.instance();
    let v = inst.v();
    let sink = inst.sink();
    let aware = model.variant == Variant::Ca;
    let idle = model.options.allow_idle_robots;
    let mut open: Vec<bool> = vec![true; v + 1];
    open[0] = false;
    let mut remaining = v;
    let mut times: Vec<Option<f64>> = vec![None; v + 1];
    let mut routes = Vec::with_capacity(inst.robots);
    let mut total = 0.0;

    for r in 0..inst.robots {
        let robots_left = inst.robots - r;
        let share = remaining.div_ceil(robots_left);
        let mut route: Vec<usize> = Vec::new();
        let mut last = 0;
        let mut clock = inst.e0();
        while route.len() < share {
            let mut pick: Option<(f64, usize, f64)> = None;
            for node in (1..=v).filter(|&n| open[n]) {
                if !model.arc_allowed(last, node) || !model.arc_allowed(node, sink) {
                    continue;
                }
                let t = if last == 0 {
                    inst.e0() + inst.t(0, node)
                } else {
                    clock + inst.service(last) + inst.t(last, node)
                };
                let win = inst.node(node);
                if t < win.earliest - TIME_TOL || t > win.latest + TIME_TOL {
                    continue;
                }
                if t + inst.service(node) + inst.t(node, sink) > inst.horizon() + TIME_TOL {
                    continue;
                }
                if aware
                    && inst.collisions.partners(node).any(|p| {
                        times[p]
                            .is_some_and(|tp| interval_overlap(t, inst.service(node), tp, inst.service(p)) > TIME_TOL)
                    })
                {
                    continue;
                }
                let d = inst.t(last, node);
                if pick.is_none_or(|(best, _, _)| d < best) {
                    pick = Some((d, node, t));
                }
            }
            let Some((d, node, t)) = pick else { break };
            total += d;
            open[node] = false;
            remaining -= 1;
            times[node] = Some(t);
            clock = t;
            last = node;
            route.push(node);
        }
        if route.is_empty() && !(idle && remaining == 0) {
            return None;
        }
        if last != 0 {
            total += inst.t(last, sink);
        }
        routes.push(route);
    }
    (remaining == 0).then(|| (total, canonical(routes)))
}
