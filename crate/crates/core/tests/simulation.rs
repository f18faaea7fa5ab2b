use beampath::instance::{generate_instance, GenerateParams};
use beampath::model::build_model;
use beampath::simulation::{evaluate_with_links, LinkTable};
use beampath::solver::solve;
use beampath::{seed, RadioParams, Scenario, SolveLimits, SolveStatus, Variant};

#[test]
fn ca_schedules_are_collision_free_and_never_slower_links() {
    let radio = RadioParams::default();
    let mut compared = 0;
    for run in 0..6u64 {
        let params = GenerateParams { scenario: Scenario::A, nodes: 8, robots: 3, seed: run, ..Default::default() };
        let inst = generate_instance(&params).unwrap();
        let layout = params.layout.build().unwrap();
        let links = LinkTable::sample(&inst, &layout, &radio, &mut seed::rng(run, seed::Purpose::LinkStates, &[]));
        let cua = solve(&build_model(&inst, Variant::Cua), &SolveLimits::default());
        let ca = solve(&build_model(&inst, Variant::Ca), &SolveLimits::default());
        if cua.status != SolveStatus::Optimal || ca.status != SolveStatus::Optimal {
            continue;
        }
        compared += 1;
        let e_cua = evaluate_with_links(&cua, &inst, &layout, &radio, &links).unwrap();
        let e_ca = evaluate_with_links(&ca, &inst, &layout, &radio, &links).unwrap();
        assert!(e_ca.collision_events.is_empty());
        assert!(e_ca.overall_rate >= e_cua.overall_rate * (1.0 - 1e-12));
        if !e_cua.collision_events.is_empty() {
            assert!(e_ca.overall_rate > e_cua.overall_rate);
        }
        assert_eq!(e_cua.per_node.len(), inst.v());
        assert_eq!(e_cua.total_travel_time, cua.objective.unwrap());
    }
    assert!(compared > 0);
}

#[test]
fn execution_mode_does_not_change_results() {
    use beampath::parallel::Execution;
    use beampath::simulation::{run_monte_carlo, ExperimentConfig};

    let config = ExperimentConfig {
        scenarios: vec![Scenario::A, Scenario::B],
        node_counts: vec![7],
        runs: 3,
        ..Default::default()
    };
    let par = run_monte_carlo(&ExperimentConfig { execution: Execution::Parallel, ..config.clone() }).unwrap();
    let seq = run_monte_carlo(&ExperimentConfig { execution: Execution::Sequential, ..config }).unwrap();
    assert_eq!(par.records, seq.records);
    assert_eq!(par.summaries, seq.summaries);
    assert_eq!(par.records.len(), 6);
}
