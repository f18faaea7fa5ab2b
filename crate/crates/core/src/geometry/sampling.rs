use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{interfering_beam_pairs, CellLayout, CollisionRegion, Point};
use crate::error::{Error, Result};
use crate::instance::{Node, NodeSet, Scenario};
use crate::seed::{self, Purpose};

/// How visit windows are generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum WindowMode {
    /// Every node gets `[0, horizon]`.
    Fixed,
    /// `e_i ~ U[0, horizon/2]`, `l_i = min(e_i + width, horizon)`.
    Randomized { width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NodeSampling {
    /// Wedge truncation used for the collision region; `None` means the
    /// cell side length.
    pub range_limit: Option<f64>,
    pub min_separation: f64,
    /// Minimum distance to any base station.
    pub min_bs_distance: f64,
    /// Depot window end `l_0`, seconds.
    pub horizon: f64,
    pub service_time: f64,
    pub windows: WindowMode,
    /// Rejection-sampling budget per node.
    pub max_attempts: usize,
}

impl Default for NodeSampling {
    fn default() -> Self {
        NodeSampling {
            range_limit: None,
            min_separation: 1.0,
            min_bs_distance: 1.0,
            horizon: 200.0,
            service_time: 2.0,
            windows: WindowMode::Fixed,
            max_attempts: 100_000,
        }
    }
}

/// Draws `count` visit nodes for the given scenario.
///
/// Scenario A draws uniformly over the collision region, scenario B uniformly
/// over the union of all hexagons. Both reject points closer than
/// `min_separation` to an accepted node or `min_bs_distance` to a base
/// station. Deterministic in `seed`.
pub fn sample_nodes(
    scenario: Scenario,
    count: usize,
    layout: &CellLayout,
    seed: u64,
    opts: &NodeSampling,
) -> Result<NodeSet> {
    if count == 0 {
        return Err(Error::Parameter("node count must be at least 1".into()));
    }
    let range = opts.range_limit.unwrap_or(layout.side_length);
    let region = CollisionRegion::new(layout, &interfering_beam_pairs(layout, range), range);
    let (lo, hi) = match scenario {
        Scenario::A => region.bounds().ok_or_else(|| Error::Sampling("collision region is empty".into()))?,
        Scenario::B => (0..layout.cells.len())
            .map(|c| layout.hexagon(c).bounds())
            .reduce(|(lo, hi), (l2, h2)| {
                (Point::new(lo.x.min(l2.x), lo.y.min(l2.y)), Point::new(hi.x.max(h2.x), hi.y.max(h2.y)))
            })
            .ok_or_else(|| Error::Sampling("layout has no cells".into()))?,
    };
    let inside = |p: Point| match scenario {
        Scenario::A => region.contains(p),
        Scenario::B => layout.in_coverage(p),
    };

    let mut rng = seed::rng(seed, Purpose::NodePlacement, &[]);
    let mut positions: Vec<Point> = Vec::with_capacity(count);
    while positions.len() < count {
        let mut accepted = None;
        for _ in 0..opts.max_attempts {
            let p = Point::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
            if !inside(p) {
                continue;
            }
            if layout.cells.iter().any(|c| c.center.distance(p) < opts.min_bs_distance) {
                continue;
            }
            if positions.iter().any(|q| q.distance(p) < opts.min_separation) {
                continue;
            }
            accepted = Some(p);
            break;
        }
        match accepted {
            Some(p) => positions.push(p),
            None => {
                return Err(Error::Sampling(format!(
                    "no admissible position for node {} after {} attempts",
                    positions.len() + 1,
                    opts.max_attempts
                )))
            }
        }
    }

    let mut window_rng = seed::rng(seed, Purpose::TimeWindows, &[]);
    let nodes = positions
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let (e, l) = match opts.windows {
                WindowMode::Fixed => (0.0, opts.horizon),
                WindowMode::Randomized { width } => {
                    let e = window_rng.random_range(0.0..=0.5 * opts.horizon);
                    (e, (e + width).min(opts.horizon))
                }
            };
            Node::new(i + 1, p, e, l, opts.service_time)
        })
        .collect();
    NodeSet::new(nodes, layout.depot, (0.0, opts.horizon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_layout;

    #[test]
    fn scenario_a_nodes_lie_in_collision_region() {
        let layout = build_layout(50.0, 12).unwrap();
        let region = CollisionRegion::new(&layout, &interfering_beam_pairs(&layout, 50.0), 50.0);
        let set = sample_nodes(Scenario::A, 16, &layout, 11, &NodeSampling::default()).unwrap();
        assert_eq!(set.len(), 16);
        assert!(set.nodes.iter().all(|n| region.contains(n.position())));
    }

    #[test]
    fn scenario_b_nodes_lie_in_coverage() {
        let layout = build_layout(50.0, 12).unwrap();
        let set = sample_nodes(Scenario::B, 18, &layout, 3, &NodeSampling::default()).unwrap();
        assert!(set.nodes.iter().all(|n| layout.in_coverage(n.position())));
    }

    #[test]
    fn sampling_is_deterministic_and_separated() {
        let layout = build_layout(50.0, 12).unwrap();
        let opts = NodeSampling { min_separation: 3.0, ..Default::default() };
        let a = sample_nodes(Scenario::A, 12, &layout, 5, &opts).unwrap();
        let b = sample_nodes(Scenario::A, 12, &layout, 5, &opts).unwrap();
        assert_eq!(a, b);
        let c = sample_nodes(Scenario::A, 12, &layout, 6, &opts).unwrap();
        assert_ne!(a, c);
        for (i, x) in a.nodes.iter().enumerate() {
            for y in &a.nodes[i + 1..] {
                assert!(x.position().distance(y.position()) >= 3.0);
            }
        }
    }

    #[test]
    fn impossible_separation_fails() {
        let layout = build_layout(50.0, 12).unwrap();
        let opts = NodeSampling { min_separation: 500.0, max_attempts: 1000, ..Default::default() };
        assert!(matches!(sample_nodes(Scenario::A, 3, &layout, 1, &opts), Err(Error::Sampling(_))));
        assert!(sample_nodes(Scenario::A, 0, &layout, 1, &NodeSampling::default()).is_err());
    }

    #[test]
    fn randomized_windows_stay_in_horizon() {
        let layout = build_layout(50.0, 12).unwrap();
        let opts = NodeSampling { windows: WindowMode::Randomized { width: 40.0 }, ..Default::default() };
        let set = sample_nodes(Scenario::B, 10, &layout, 9, &opts).unwrap();
        for n in &set.nodes {
            assert!(n.earliest >= 0.0 && n.earliest <= 100.0);
            assert!(n.latest <= 200.0 && n.latest >= n.earliest);
        }
    }
}
