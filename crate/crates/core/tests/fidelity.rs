//! The model's feasible set, checked against the validator by brute force.
//! Binaries are fixed by enumeration and the arrival times are left to
//! `completes`.

mod common;

use beampath::model::{build, completes, Family, MilpModel, ModelOptions, VarRole};
use beampath::solver::validate_with;
use beampath::{Instance, Solution, SolveStatus, Variant};

const TOL: f64 = 1e-7;

/// Arc values for labelled routes, or `None` when a needed arc was pruned.
fn arc_values(model: &MilpModel, routes: &[Vec<usize>]) -> Option<Vec<f64>> {
    let sink = model.instance().sink();
    let mut values = vec![0.0; model.variables.len()];
    for (k, route) in routes.iter().enumerate() {
        let full: Vec<usize> = std::iter::once(0).chain(route.iter().copied()).chain([sink]).collect();
        for w in full.windows(2) {
            values[model.arc_var(w[0], w[1], k + 1)?] = 1.0;
        }
    }
    Some(values)
}

fn order_vars(model: &MilpModel) -> Vec<usize> {
    (0..model.variables.len()).filter(|&i| matches!(model.variables[i].role, VarRole::Order { .. })).collect()
}

/// Whether any orientation of the order variables completes `values`.
fn model_feasible(model: &MilpModel, values: &mut [f64]) -> bool {
    let z = order_vars(model);
    (0..1u64 << z.len()).any(|mask| {
        for (b, &var) in z.iter().enumerate() {
            values[var] = ((mask >> b) & 1) as f64;
        }
        completes(model, values, TOL).unwrap()
    })
}

fn check_instance(inst: &Instance, variant: Variant, idle: bool) -> (usize, usize) {
    let model = build(inst, variant, ModelOptions { allow_idle_robots: idle, ..Default::default() });
    let unpruned =
        build(inst, variant, ModelOptions { allow_idle_robots: idle, prune_arcs: false, ..Default::default() });
    let mut accepted = 0;
    let sets = common::labelled_route_sets(inst.v(), inst.robots, idle);
    for routes in &sets {
        let sol = Solution::from_routes(inst, variant, SolveStatus::Optimal, routes);
        let prose = validate_with(&sol, inst, variant, idle).is_valid();
        for m in [&model, &unpruned] {
            let milp = match arc_values(m, routes) {
                Some(mut values) => model_feasible(m, &mut values),
                None => false,
            };
            assert_eq!(milp, prose, "{variant} routes {routes:?} pruned={}", m.options.prune_arcs);
        }
        accepted += prose as usize;
    }
    (sets.len(), accepted)
}

#[test]
fn route_sets_agree_with_validator() {
    let mut accepted = 0;
    let mut rejected = 0;
    for v in 2..=5usize {
        for seed in 0..4u64 {
            let inst = common::random_instance(1000 + 10 * v as u64 + seed, v, 2);
            for variant in [Variant::Cua, Variant::Ca] {
                let (total, ok) = check_instance(&inst, variant, false);
                accepted += ok;
                rejected += total - ok;
            }
        }
    }
    assert!(accepted > 0 && rejected > 0, "accepted {accepted}, rejected {rejected}");
}

#[test]
fn idle_route_sets_agree_with_validator() {
    for seed in 0..3u64 {
        let inst = common::random_instance(2000 + seed, 3, 2);
        for variant in [Variant::Cua, Variant::Ca] {
            check_instance(&inst, variant, true);
        }
    }
}

/// Every 0/1 arc assignment on a two-node instance: the feasible ones are
/// exactly the valid route sets, and subtours never get through.
#[test]
fn every_arc_assignment_on_two_nodes() {
    for seed in 0..4u64 {
        let inst = common::random_instance(3000 + seed, 2, 2);
        for variant in [Variant::Cua, Variant::Ca] {
            let model = build(&inst, variant, ModelOptions { prune_arcs: false, ..Default::default() });
            let arcs: Vec<usize> = (0..model.variables.len())
                .filter(|&i| matches!(model.variables[i].role, VarRole::Arc { .. }))
                .collect();
            let mut feasible = 0;
            for mask in 0..1u64 << arcs.len() {
                let mut values = vec![0.0; model.variables.len()];
                for (b, &var) in arcs.iter().enumerate() {
                    values[var] = ((mask >> b) & 1) as f64;
                }
                if !model_feasible(&model, &mut values) {
                    continue;
                }
                feasible += 1;
                let routes = follow(&model, &values);
                let sol = Solution::from_routes(&inst, variant, SolveStatus::Optimal, &routes);
                assert!(validate_with(&sol, &inst, variant, false).is_valid(), "{variant} {routes:?}");
                assert_eq!(arc_values(&model, &routes).unwrap(), strip(&model, &values));
            }
            let valid = common::labelled_route_sets(2, 2, false)
                .iter()
                .filter(|r| {
                    let sol = Solution::from_routes(&inst, variant, SolveStatus::Optimal, r);
                    validate_with(&sol, &inst, variant, false).is_valid()
                })
                .count();
            assert_eq!(feasible, valid, "seed {seed} {variant}");
        }
    }
}

fn follow(model: &MilpModel, values: &[f64]) -> Vec<Vec<usize>> {
    let sink = model.instance().sink();
    (1..=model.robots())
        .map(|k| {
            let mut route = Vec::new();
            let mut at = 0;
            loop {
                let next = (1..=sink).find(|&j| model.arc_var(at, j, k).is_some_and(|x| values[x] > 0.5)).unwrap();
                if next == sink {
                    break route;
                }
                route.push(next);
                at = next;
            }
        })
        .collect()
}

fn strip(model: &MilpModel, values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .enumerate()
        .map(|(i, &x)| if matches!(model.variables[i].role, VarRole::Arc { .. }) { x } else { 0.0 })
        .collect()
}

#[test]
fn family_counts_for_three_robots_sixteen_nodes() {
    let inst = common::random_instance(42, 16, 3);
    let pairs = inst.collisions.pair_count();
    let model = build(&inst, Variant::Ca, ModelOptions { prune_arcs: false, ..Default::default() });
    let stats = model.stats();
    let (k, v) = (3, 16);
    let expected = [
        (Family::DepartDepot, k),
        (Family::ReturnDepot, k),
        (Family::VisitOnce, v),
        (Family::FlowBalance, k * (v + 2)),
        (Family::FirstArrivalLower, k * v),
        (Family::Precedence, k * v * (v - 1)),
        (Family::ReturnDeadline, k * v),
        (Family::FirstArrivalUpper, k * v),
        (Family::ArrivalUpper, v * (v - 1)),
        (Family::Window, 2 * v),
        (Family::CollisionCount, usize::from(pairs > 0)),
        (Family::CollisionOrder, pairs),
        (Family::NonOverlap, 2 * pairs),
    ];
    for (family, count) in expected {
        assert_eq!(stats.constraints.get(&family).copied().unwrap_or(0), count, "{family:?}");
    }
}
