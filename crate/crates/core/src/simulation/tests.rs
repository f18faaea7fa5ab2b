use super::*;
use crate::geometry::Point;
use crate::model::build_mp_ca;
use crate::model::build_mp_cua;
use crate::radio::RadioParams;
use crate::solver::{solve, SolveLimits, SolveStatus};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Nodes 1 and 2 straddle the boundary between cells 0 and 1 at equal
/// distance from the depot; node 3 sits near the depot.
fn straddle() -> Instance {
    let layout = crate::instance::LayoutParams::default().build().unwrap();
    let (a, b) = (layout.cells[0].center, layout.cells[1].center);
    let mid = Point::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
    let p1 = Point::new(mid.x + 0.3 * (a.x - mid.x), mid.y + 0.3 * (a.y - mid.y));
    let p2 = Point::new(mid.x + 0.3 * (b.x - mid.x), mid.y + 0.3 * (b.y - mid.y));
    let p3 = Point::new(0.0, -5.0);
    Instance::from_points(Point::new(0.0, 0.0), &[p1, p2, p3], 200.0, 2.0, 5.0, 2, &[(1, 2)]).unwrap()
}

#[test]
fn forced_overlap_gives_one_event_and_lower_rates() {
    let inst = straddle();
    let radio = RadioParams::default();
    let layout = inst.layout.build().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let links = LinkTable::sample(&inst, &layout, &radio, &mut rng);

    // both robots leave together and reach 1 and 2 at the same time
    let forced = Solution::from_routes(&inst, Variant::Cua, SolveStatus::Feasible, &[vec![1, 3], vec![2]]);
    let hit = evaluate_with_links(&forced, &inst, &layout, &radio, &links).unwrap();
    assert_eq!(hit.collision_events.len(), 1);

    let ca = solve(&build_mp_ca(&inst), &SolveLimits::default());
    assert_eq!(ca.status, SolveStatus::Optimal);
    let clear = evaluate_with_links(&ca, &inst, &layout, &radio, &links).unwrap();
    assert!(clear.collision_events.is_empty());
    for (h, c) in hit.per_node.iter().zip(&clear.per_node).take(2) {
        assert!(h.rate < c.rate, "node {} rate {} vs {}", h.node, h.rate, c.rate);
    }
    assert_eq!(hit.per_node[2].rate, clear.per_node[2].rate);
    let mean = clear.per_node.iter().map(|n| n.rate).sum::<f64>() / 3.0;
    assert!((clear.overall_rate - mean).abs() <= 1e-9 * mean);
}

#[test]
fn deterministic_fading_evaluation_repeats() {
    let inst = straddle();
    let radio = RadioParams::default();
    let sol = solve(&build_mp_ca(&inst), &SolveLimits::default());
    let a = evaluate_schedule(&sol, &inst, &radio, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let b = evaluate_schedule(&sol, &inst, &radio, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.total_travel_time, sol.objective.unwrap());
}

#[test]
fn rejects_invalid_schedules() {
    let inst = straddle();
    let radio = RadioParams::default();
    let mut sol = solve(&build_mp_cua(&inst), &SolveLimits::default());
    sol.routes[0].pop();
    assert!(evaluate_schedule(&sol, &inst, &radio, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
}

#[test]
fn small_experiment_is_reproducible() {
    let cfg = ExperimentConfig {
        scenarios: vec![crate::instance::Scenario::A],
        node_counts: vec![6],
        runs: 3,
        robots: 2,
        ..Default::default()
    };
    let a = run_monte_carlo(&cfg).unwrap();
    let b = run_monte_carlo(&ExperimentConfig { execution: crate::parallel::Execution::Sequential, ..cfg }).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.summaries.len(), 1);
    let table = travel_time_table(&a, crate::instance::Scenario::A).unwrap();
    assert!(table.starts_with("scheme,n_visit_6\n"));
}
