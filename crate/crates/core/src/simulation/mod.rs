//! Playing schedules against the radio model, and the Monte Carlo study
//! built on top.

mod experiment;
mod export;
mod stats;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CellLayout;
use crate::instance::Instance;
use crate::model::Variant;
use crate::radio::{rate, sample_link, sinr, Interferer, LinkSample, RadioParams};
use crate::solver::{interval_overlap, validate, Solution};
use crate::TIME_TOL;

pub use experiment::{
    run_monte_carlo, summarize, CellSummary, ExperimentConfig, ExperimentResults, RunRecord, SchemeRecord,
};
pub use export::{export_results, travel_time_table, ExportFormat, ExportedFiles};
pub use stats::{quantile, BoxStats};

/// Links from every visit node to every base station for one run. The
/// collision-unaware and collision-aware schedules of a run share a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkTable {
    stations: usize,
    /// `links[(node - 1) * stations + bs]`.
    links: Vec<LinkSample>,
}

impl LinkTable {
    pub fn sample<R: Rng + ?Sized>(inst: &Instance, layout: &CellLayout, radio: &RadioParams, rng: &mut R) -> Self {
        let stations = layout.cells.len();
        let mut links = Vec::with_capacity(inst.v() * stations);
        for node in 1..=inst.v() {
            let p = inst.position(node);
            for cell in &layout.cells {
                links.push(sample_link(p.distance(cell.center), radio, rng));
            }
        }
        LinkTable { stations, links }
    }

    pub fn get(&self, node: usize, station: usize) -> &LinkSample {
        &self.links[(node - 1) * self.stations + station]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEvaluation {
    pub node: usize,
    pub robot: usize,
    pub serving_bs: usize,
    /// `[t_i, t_i + w_i]`.
    pub interval: (f64, f64),
    pub sinr: f64,
    /// bit/s.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub pair: (usize, usize),
    pub overlap: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEvaluation {
    pub per_node: Vec<NodeEvaluation>,
    pub collision_events: Vec<CollisionEvent>,
    /// Mean of the per-node rates, bit/s.
    pub overall_rate: f64,
    pub total_travel_time: f64,
}

/// Samples a fresh link table from `rng` and evaluates `solution` on it.
pub fn evaluate_schedule<R: Rng + ?Sized>(
    solution: &Solution,
    inst: &Instance,
    radio: &RadioParams,
    rng: &mut R,
) -> Result<ScheduleEvaluation> {
    let layout = inst.layout.build()?;
    let links = LinkTable::sample(inst, &layout, radio, rng);
    evaluate_with_links(solution, inst, &layout, radio, &links)
}

/// Evaluates a schedule on given links. Every node is served through the
/// main lobe of its nearest base station. While a node's service interval
/// overlaps that of a collision partner, the partner's station points its
/// main lobe at it too; every other station leaks side-lobe power when
/// side-lobe interference is enabled.
pub fn evaluate_with_links(
    solution: &Solution,
    inst: &Instance,
    layout: &CellLayout,
    radio: &RadioParams,
    links: &LinkTable,
) -> Result<ScheduleEvaluation> {
    if !solution.has_schedule() {
        return Err(Error::Schedule(format!("solution has status {}", solution.status)));
    }
    // overlap is what is being measured here, so only the routing clauses apply
    let report = validate(solution, inst, Variant::Cua);
    if let Some(v) = report.violations.first() {
        return Err(Error::Schedule(format!("schedule is not valid: {v}")));
    }
    let robot_of = solution.robot_of();
    let serving: Vec<usize> =
        (0..=inst.v()).map(|n| if n == 0 { 0 } else { layout.serving_cell(inst.position(n)) }).collect();
    let start = |n: usize| solution.arrival_times[&n];

    let mut collision_events = Vec::new();
    let mut hot: Vec<Vec<usize>> = vec![Vec::new(); inst.v() + 1];
    for (i, j) in inst.collisions.pairs() {
        let (ti, tj) = (start(i), start(j));
        if interval_overlap(ti, inst.service(i), tj, inst.service(j)) > TIME_TOL {
            collision_events.push(CollisionEvent {
                pair: (i, j),
                overlap: (ti.max(tj), (ti + inst.service(i)).min(tj + inst.service(j))),
            });
            hot[i].push(serving[j]);
            hot[j].push(serving[i]);
        }
    }

    let main = radio.main_lobe_gain();
    let mut per_node = Vec::with_capacity(inst.v());
    for node in 1..=inst.v() {
        let bs = serving[node];
        let interferers: Vec<Interferer> = (0..layout.cells.len())
            .filter(|&b| b != bs)
            .filter_map(|b| {
                let gain = if hot[node].contains(&b) {
                    main
                } else if radio.side_lobe_interference {
                    radio.side_lobe_gain
                } else {
                    return None;
                };
                Some(Interferer { link: *links.get(node, b), gain })
            })
            .collect();
        let s = sinr(links.get(node, bs), &interferers, radio);
        let t = start(node);
        per_node.push(NodeEvaluation {
            node,
            robot: robot_of[&node],
            serving_bs: bs,
            interval: (t, t + inst.service(node)),
            sinr: s,
            rate: rate(s, radio.bandwidth_hz),
        });
    }
    let overall_rate =
        if per_node.is_empty() { 0.0 } else { per_node.iter().map(|n| n.rate).sum::<f64>() / per_node.len() as f64 };
    Ok(ScheduleEvaluation {
        per_node,
        collision_events,
        overall_rate,
        total_travel_time: solution.objective.unwrap_or(0.0),
    })
}

#[cfg(test)]
mod tests;
