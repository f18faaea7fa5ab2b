mod common;

use std::f64::consts::TAU;

use approx::assert_relative_eq;
use beampath::geometry::{build_layout, ConvexPolygon};
use beampath::model::build_model;
use beampath::radio::{self, LinkSample, LinkState};
use beampath::solver::{interval_overlap, route_cost, solve, validate, Clause};
use beampath::{Point, RadioParams, SolveLimits, SolveStatus, Variant};
use proptest::prelude::*;

proptest! {
    #[test]
    fn radiated_power_is_conserved(theta in 0.01f64..TAU, gs in 0.0f64..1.0) {
        let gm = radio::main_lobe_gain(theta, gs);
        assert_relative_eq!(theta * gm + (TAU - theta) * gs, TAU, max_relative = 1e-12);
        prop_assert!(gm >= 1.0);
    }

    #[test]
    fn rate_grows_with_sinr(a in 0.0f64..1e6, b in 0.0f64..1e6) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(radio::rate(lo, 1e8) <= radio::rate(hi, 1e8));
    }

    #[test]
    fn path_loss_falls_with_distance(d in 1.0f64..500.0, extra in 0.0f64..500.0) {
        let p = RadioParams::default();
        for state in [LinkState::Los, LinkState::Nlos] {
            prop_assert!(radio::path_loss(d + extra, state, &p).gain <= radio::path_loss(d, state, &p).gain);
        }
    }

    #[test]
    fn interference_only_lowers_sinr(d in 1.0f64..200.0, di in 1.0f64..200.0, gain in 0.0f64..20.0) {
        let p = RadioParams::default();
        let serving = LinkSample { state: LinkState::Los, fading_power: 1.0, distance: d };
        let other = radio::Interferer { link: LinkSample { state: LinkState::Los, fading_power: 1.0, distance: di }, gain };
        prop_assert!(radio::sinr(&serving, &[other], &p) <= radio::sinr(&serving, &[], &p));
    }

    #[test]
    fn beam_index_matches_azimuth(r in 0.5f64..40.0, angle in 0.0f64..TAU) {
        let layout = build_layout(20.0, 12).unwrap();
        let center = layout.cell(0).center;
        let beam = layout.beam_of(Point::polar(center, r, angle), 0).unwrap();
        let lo = beam.index as f64 * layout.beamwidth;
        let hi = lo + layout.beamwidth;
        // sector boundaries are snapped, allow a hair on either side
        let wrapped = if angle >= TAU - 1e-6 && beam.index == 0 { angle - TAU } else { angle };
        prop_assert!(wrapped >= lo - 1e-6 && wrapped < hi + 1e-6, "angle {angle} in beam {}", beam.index);
    }

    #[test]
    fn clipping_never_grows_area(
        ax in -10.0f64..10.0, ay in -10.0f64..10.0, size_a in 1.0f64..20.0,
        bx in -10.0f64..10.0, by in -10.0f64..10.0, size_b in 1.0f64..20.0,
    ) {
        let square = |x: f64, y: f64, s: f64| ConvexPolygon::new(vec![
            Point::new(x, y), Point::new(x + s, y), Point::new(x + s, y + s), Point::new(x, y + s),
        ]);
        let (a, b) = (square(ax, ay, size_a), square(bx, by, size_b));
        let both = a.intersection(&b);
        prop_assert!(both.area() <= a.area().min(b.area()) + 1e-9);
        let expected = ((ax + size_a).min(bx + size_b) - ax.max(bx)).max(0.0)
            * ((ay + size_a).min(by + size_b) - ay.max(by)).max(0.0);
        prop_assert!((both.area() - expected).abs() < 1e-9);
    }

    #[test]
    fn overlap_is_symmetric(a in 0.0f64..100.0, wa in 0.0f64..10.0, b in 0.0f64..100.0, wb in 0.0f64..10.0) {
        let o = interval_overlap(a, wa, b, wb);
        prop_assert_eq!(o, interval_overlap(b, wb, a, wa));
        prop_assert!(o <= wa.min(wb) + 1e-12);
        let apart = a + wa < b || b + wb < a;
        prop_assert_eq!(o < 0.0, apart);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn solutions_validate_and_ca_costs_more(seed in 0u64..10_000, v in 2usize..6) {
        let inst = common::random_instance(seed, v, 2);
        let cua = solve(&build_model(&inst, Variant::Cua), &SolveLimits::default());
        let ca = solve(&build_model(&inst, Variant::Ca), &SolveLimits::default());
        for (sol, variant) in [(&cua, Variant::Cua), (&ca, Variant::Ca)] {
            if sol.status == SolveStatus::Optimal {
                prop_assert!(validate(sol, &inst, variant).is_valid());
                prop_assert_eq!(sol.objective.unwrap(), route_cost(&inst, &sol.routes));
                prop_assert!(sol.stats.max_row_violation.unwrap() < 1e-6);
            }
        }
        if ca.status == SolveStatus::Optimal {
            prop_assert_eq!(cua.status, SolveStatus::Optimal);
            prop_assert!(ca.objective.unwrap() >= cua.objective.unwrap() - 1e-9);
            // a collision-aware schedule is also collision-unaware feasible
            prop_assert!(validate(&ca, &inst, Variant::Cua).is_valid());
        }
    }

    #[test]
    fn validator_catches_shifted_arrivals(seed in 0u64..10_000, node in 1usize..5, shift in 0.01f64..5.0) {
        let inst = common::random_instance(seed, 4, 2);
        let sol = solve(&build_model(&inst, Variant::Cua), &SolveLimits::default());
        prop_assume!(sol.status == SolveStatus::Optimal);
        let mut bad = sol.clone();
        *bad.arrival_times.get_mut(&node).unwrap() += shift;
        prop_assert!(validate(&bad, &inst, Variant::Cua).failed_clauses().contains(&Clause::ArrivalChain));
    }

    #[test]
    fn validator_catches_dropped_nodes(seed in 0u64..10_000) {
        let inst = common::random_instance(seed, 4, 2);
        let sol = solve(&build_model(&inst, Variant::Cua), &SolveLimits::default());
        prop_assume!(sol.status == SolveStatus::Optimal);
        let mut bad = sol.clone();
        let route = bad.routes.iter_mut().max_by_key(|r| r.len()).unwrap();
        prop_assume!(route.len() > 3);
        let dropped = route.remove(1);
        bad.arrival_times.remove(&dropped);
        prop_assert!(validate(&bad, &inst, Variant::Cua).failed_clauses().contains(&Clause::VisitOnce));
    }
}
