//! Problem instances and their JSON form.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{
    self, collision_matrix, interfering_beam_pairs, sample_nodes, CellLayout, NodeSampling, Point, TravelTimes,
    DEFAULT_BEAMWIDTH,
};
use crate::SCHEMA_VERSION;

/// Node placement scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// All nodes inside the collision region.
    A,
    /// Nodes spread over the whole coverage area.
    B,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scenario::A => f.write_str("A"),
            Scenario::B => f.write_str("B"),
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Scenario::A),
            "B" | "b" => Ok(Scenario::B),
            other => Err(Error::Parameter(format!("unknown scenario {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "e")]
    pub earliest: f64,
    #[serde(rename = "l")]
    pub latest: f64,
    #[serde(rename = "w")]
    pub service: f64,
}

impl Node {
    pub fn new(id: usize, position: Point, earliest: f64, latest: f64, service: f64) -> Self {
        Node { id, x: position.x, y: position.y, earliest, latest, service }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Visit nodes `1..=v` plus the depot, which appears twice in the routing
/// graph: as source `0` and as sink `v + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    pub nodes: Vec<Node>,
    pub depot: Point,
    /// `[e_0, l_0]`.
    pub depot_window: (f64, f64),
}

impl NodeSet {
    pub fn new(nodes: Vec<Node>, depot: Point, depot_window: (f64, f64)) -> Result<Self> {
        let set = NodeSet { nodes, depot, depot_window };
        set.check()?;
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn check(&self) -> Result<()> {
        let (e0, l0) = self.depot_window;
        if !(e0.is_finite() && l0.is_finite() && e0 <= l0) {
            return Err(Error::Instance(format!("bad depot window [{e0}, {l0}]")));
        }
        for (k, n) in self.nodes.iter().enumerate() {
            if n.id != k + 1 {
                return Err(Error::Instance(format!(
                    "node ids must be 1..=v in order; position {} holds id {}",
                    k + 1,
                    n.id
                )));
            }
            if !(n.earliest <= n.latest) || !n.earliest.is_finite() || !n.latest.is_finite() {
                return Err(Error::Instance(format!("node {} has window [{}, {}]", n.id, n.earliest, n.latest)));
            }
            if n.latest > l0 {
                return Err(Error::Instance(format!(
                    "node {} closes at {} after the depot horizon {}",
                    n.id, n.latest, l0
                )));
            }
            if !(n.service >= 0.0) {
                return Err(Error::Instance(format!("node {} has negative service time", n.id)));
            }
        }
        Ok(())
    }
}

/// Symmetric 0/1 matrix over visit nodes, stored as the set of `i < j`
/// pairs with `h_ij = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CollisionMatrix {
    size: usize,
    pairs: BTreeSet<(usize, usize)>,
}

impl CollisionMatrix {
    pub fn empty(size: usize) -> Self {
        CollisionMatrix { size, pairs: BTreeSet::new() }
    }

    pub fn from_pairs(size: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut h = CollisionMatrix::empty(size);
        for (i, j) in pairs {
            if i == j || i == 0 || j == 0 || i > size || j > size {
                return Err(Error::Instance(format!("invalid collision pair ({i}, {j})")));
            }
            h.insert(i, j);
        }
        Ok(h)
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        debug_assert!(i != j);
        self.pairs.insert((i.min(j), i.max(j)));
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        i != j && self.pairs.contains(&(i.min(j), i.max(j)))
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Unordered pairs, ascending.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn partners(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().filter_map(move |&(a, b)| {
            if a == i {
                Some(b)
            } else if b == i {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Nodes appearing in at least one pair.
    pub fn collision_nodes(&self) -> BTreeSet<usize> {
        self.pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    Cloverleaf,
    SingleCell,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutParams {
    pub kind: LayoutKind,
    pub side_length: f64,
    pub beams_per_cell: usize,
    pub beamwidth: f64,
    /// Wedge truncation used to pair beams.
    pub range_limit: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            kind: LayoutKind::Cloverleaf,
            side_length: 50.0,
            beams_per_cell: 12,
            beamwidth: DEFAULT_BEAMWIDTH,
            range_limit: 50.0,
        }
    }
}

impl LayoutParams {
    pub fn build(&self) -> Result<CellLayout> {
        match self.kind {
            LayoutKind::Cloverleaf => CellLayout::cloverleaf(self.side_length, self.beams_per_cell, self.beamwidth),
            LayoutKind::SingleCell => CellLayout::single_cell(self.side_length, self.beams_per_cell),
        }
    }
}

/// A fully specified routing instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub layout: LayoutParams,
    pub scenario: Option<Scenario>,
    pub nodes: NodeSet,
    pub velocity: f64,
    pub robots: usize,
    pub collisions: CollisionMatrix,
    travel: TravelTimes,
}

impl Instance {
    pub fn new(
        layout: LayoutParams,
        scenario: Option<Scenario>,
        nodes: NodeSet,
        velocity: f64,
        robots: usize,
        collisions: CollisionMatrix,
    ) -> Result<Self> {
        if robots == 0 {
            return Err(Error::Instance("need at least one robot".into()));
        }
        if collisions.size() != nodes.len() {
            return Err(Error::Instance(format!(
                "collision matrix covers {} nodes, instance has {}",
                collisions.size(),
                nodes.len()
            )));
        }
        let travel = geometry::travel_time_matrix(&nodes, velocity)?;
        Ok(Instance { layout, scenario, nodes, velocity, robots, collisions, travel })
    }

    /// Instance over explicit coordinates with every window `[0, horizon]`
    /// and the default layout.
    pub fn from_points(
        depot: Point,
        points: &[Point],
        horizon: f64,
        service: f64,
        velocity: f64,
        robots: usize,
        pairs: &[(usize, usize)],
    ) -> Result<Self> {
        let nodes = points.iter().enumerate().map(|(k, &p)| Node::new(k + 1, p, 0.0, horizon, service)).collect();
        let set = NodeSet::new(nodes, depot, (0.0, horizon))?;
        let h = CollisionMatrix::from_pairs(points.len(), pairs.iter().copied())?;
        Instance::new(LayoutParams::default(), None, set, velocity, robots, h)
    }

    /// Replaces the visit windows, one `(e, l)` per node.
    pub fn with_windows(&self, windows: &[(f64, f64)]) -> Result<Self> {
        if windows.len() != self.v() {
            return Err(Error::Instance(format!("{} windows for {} nodes", windows.len(), self.v())));
        }
        let nodes =
            self.nodes.nodes.iter().zip(windows).map(|(n, &(e, l))| Node { earliest: e, latest: l, ..*n }).collect();
        let set = NodeSet::new(nodes, self.nodes.depot, self.nodes.depot_window)?;
        Ok(Instance { nodes: set, ..self.clone() })
    }

    /// Number of visit nodes `v`.
    pub fn v(&self) -> usize {
        self.nodes.len()
    }

    /// Index of the sink copy of the depot.
    pub fn sink(&self) -> usize {
        self.nodes.len() + 1
    }

    pub fn travel(&self) -> &TravelTimes {
        &self.travel
    }

    #[inline]
    pub fn t(&self, i: usize, j: usize) -> f64 {
        self.travel.get(i, j)
    }

    pub fn e0(&self) -> f64 {
        self.nodes.depot_window.0
    }

    pub fn horizon(&self) -> f64 {
        self.nodes.depot_window.1
    }

    /// Visit node by id (`1..=v`).
    pub fn node(&self, id: usize) -> &Node {
        &self.nodes.nodes[id - 1]
    }

    pub fn service(&self, id: usize) -> f64 {
        if id == 0 || id == self.sink() {
            0.0
        } else {
            self.node(id).service
        }
    }

    pub fn position(&self, id: usize) -> Point {
        if id == 0 || id == self.sink() {
            self.nodes.depot
        } else {
            self.node(id).position()
        }
    }

    /// Hex-encoded SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(&self.to_file()).expect("instance serialises");
        let hash = Sha256::digest(&json);
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Same geometry with every time quantity multiplied by `factor`.
    pub fn time_scaled(&self, factor: f64) -> Result<Instance> {
        let nodes = self
            .nodes
            .nodes
            .iter()
            .map(|n| Node {
                earliest: n.earliest * factor,
                latest: n.latest * factor,
                service: n.service * factor,
                ..*n
            })
            .collect();
        let (e0, l0) = self.nodes.depot_window;
        let set = NodeSet::new(nodes, self.nodes.depot, (e0 * factor, l0 * factor))?;
        let mut scaled =
            Instance::new(self.layout, self.scenario, set, self.velocity, self.robots, self.collisions.clone())?;
        scaled.velocity = self.velocity / factor;
        scaled.travel = self.travel.scaled(factor);
        Ok(scaled)
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            schema_version: SCHEMA_VERSION,
            layout: self.layout,
            scenario: self.scenario,
            depot: DepotRecord {
                x: self.nodes.depot.x,
                y: self.nodes.depot.y,
                e: self.nodes.depot_window.0,
                l: self.nodes.depot_window.1,
            },
            velocity: self.velocity,
            robots: self.robots,
            nodes: self.nodes.nodes.clone(),
            collision_pairs: self.collisions.pairs().map(|(a, b)| [a, b]).collect(),
        }
    }

    pub fn from_file(file: InstanceFile) -> Result<Self> {
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema { found: file.schema_version, expected: SCHEMA_VERSION });
        }
        let v = file.nodes.len();
        let nodes = NodeSet::new(file.nodes, Point::new(file.depot.x, file.depot.y), (file.depot.e, file.depot.l))?;
        let h = CollisionMatrix::from_pairs(v, file.collision_pairs.iter().map(|p| (p[0], p[1])))?;
        Instance::new(file.layout, file.scenario, nodes, file.velocity, file.robots, h)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Instance::from_file(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Instance::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepotRecord {
    pub x: f64,
    pub y: f64,
    pub e: f64,
    pub l: f64,
}

/// On-disk instance document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub layout: LayoutParams,
    #[serde(default)]
    pub scenario: Option<Scenario>,
    pub depot: DepotRecord,
    pub velocity: f64,
    pub robots: usize,
    pub nodes: Vec<Node>,
    /// Sparse `h`: every unordered pair with `h_ij = 1`.
    pub collision_pairs: Vec<[usize; 2]>,
}

/// Everything needed to draw one random instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerateParams {
    pub scenario: Scenario,
    pub nodes: usize,
    pub robots: usize,
    pub seed: u64,
    pub layout: LayoutParams,
    pub velocity: f64,
    pub sampling: NodeSampling,
}

impl Default for GenerateParams {
    fn default() -> Self {
        GenerateParams {
            scenario: Scenario::A,
            nodes: 12,
            robots: 3,
            seed: 0,
            layout: LayoutParams::default(),
            velocity: 5.0,
            sampling: NodeSampling::default(),
        }
    }
}

impl GenerateParams {
    /// TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Ok(serde_json::from_str(text)?)
        } else {
            Ok(toml::from_str(text)?)
        }
    }
}

pub fn generate_instance(params: &GenerateParams) -> Result<Instance> {
    let layout = params.layout.build()?;
    let sampling = NodeSampling { range_limit: Some(params.layout.range_limit), ..params.sampling.clone() };
    let nodes = sample_nodes(params.scenario, params.nodes, &layout, params.seed, &sampling)?;
    let pairs = interfering_beam_pairs(&layout, params.layout.range_limit);
    let h = collision_matrix(&nodes, &layout, &pairs)?;
    Instance::new(params.layout, Some(params.scenario), nodes, params.velocity, params.robots, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_preserves_instance() {
        let inst = generate_instance(&GenerateParams { nodes: 8, seed: 4, ..Default::default() }).unwrap();
        let back = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(inst, back);
        assert_eq!(inst.digest(), back.digest());
    }

    #[test]
    fn rejects_wrong_schema_and_bad_pairs() {
        let inst = generate_instance(&GenerateParams { nodes: 4, seed: 1, ..Default::default() }).unwrap();
        let mut file = inst.to_file();
        file.schema_version = 99;
        assert!(matches!(Instance::from_file(file), Err(Error::Schema { found: 99, .. })));
        let mut file = inst.to_file();
        file.collision_pairs.push([2, 2]);
        assert!(Instance::from_file(file).is_err());
        let mut file = inst.to_file();
        file.nodes[0].latest = 500.0;
        assert!(Instance::from_file(file).is_err());
    }

    #[test]
    fn collision_matrix_is_symmetric() {
        let h = CollisionMatrix::from_pairs(5, [(3, 1), (2, 5)]).unwrap();
        assert!(h.get(1, 3) && h.get(3, 1));
        assert!(!h.get(1, 1));
        assert_eq!(h.partners(5).collect::<Vec<_>>(), vec![2]);
        assert_eq!(h.collision_nodes().into_iter().collect::<Vec<_>>(), vec![1, 2, 3, 5]);
    }

    #[test]
    fn generated_instances_are_reproducible() {
        let p = GenerateParams { scenario: Scenario::A, nodes: 16, robots: 3, seed: 7, ..Default::default() };
        assert_eq!(generate_instance(&p).unwrap().to_json(), generate_instance(&p).unwrap().to_json());
    }
}
