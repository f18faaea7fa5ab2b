#![allow(dead_code)]

use beampath::{Instance, Point};
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small random instance: nodes in a 60 m square around the depot, random
/// collision pairs and, for odd seeds, random visit windows.
pub fn random_instance(seed: u64, v: usize, robots: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Point> =
        (0..v).map(|_| Point::new(rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0))).collect();
    let mut pairs = Vec::new();
    for i in 1..=v {
        for j in i + 1..=v {
            if rng.random_bool(0.35) {
                pairs.push((i, j));
            }
        }
    }
    let horizon: f64 = if seed.is_multiple_of(3) { 60.0 } else { 200.0 };
    let inst = Instance::from_points(Point::new(0.0, 0.0), &points, horizon, 2.0, 5.0, robots, &pairs).unwrap();
    if seed % 2 == 1 {
        let windows: Vec<(f64, f64)> = (0..v)
            .map(|_| {
                let e: f64 = rng.random_range(0.0..25.0);
                (e, (e + rng.random_range(3.0..40.0)).min(horizon))
            })
            .collect();
        inst.with_windows(&windows).unwrap()
    } else {
        inst
    }
}

/// Every assignment of the visit nodes to `robots` ordered routes, robots
/// labelled. Empty routes are included only when `idle` is set.
pub fn labelled_route_sets(v: usize, robots: usize, idle: bool) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for perm in (1..=v).permutations(v) {
        // cut points between consecutive segments, non-decreasing
        for cuts in (0..=v).combinations_with_replacement(robots - 1) {
            let mut bounds = vec![0];
            bounds.extend(cuts);
            bounds.push(v);
            let routes: Vec<Vec<usize>> = bounds.windows(2).map(|w| perm[w[0]..w[1]].to_vec()).collect();
            if idle || routes.iter().all(|r| !r.is_empty()) {
                out.push(routes);
            }
        }
    }
    out
}
