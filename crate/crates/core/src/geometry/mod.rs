//! Cell layout, beam sectors and the spatial side of communication collisions.
//!
//! Cells are regular hexagons with side length `l` and a base station at the
//! center. Every base station splits the full circle into `beams_per_cell`
//! half-open sectors `[k·θ, (k+1)·θ)` measured counterclockwise from the +x
//! axis. Two beams of adjacent cells interfere when their main-lobe wedges
//! (truncated at a range limit) overlap with positive area and their
//! boresights point at each other within one beamwidth.

pub mod polygon;
mod sampling;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{CollisionMatrix, NodeSet};

pub use polygon::{ConvexPolygon, Point};
pub use sampling::{sample_nodes, NodeSampling, WindowMode};

pub const DEFAULT_BEAMWIDTH: f64 = PI / 6.0;

/// Chords used to approximate the arc of a truncated beam wedge.
const ARC_SEGMENTS: usize = 32;

/// Wedge intersections below this fraction of `l²` count as touching only.
const AREA_EPS: f64 = 1e-9;

/// Sector boundaries closer than this (in units of beamwidths) snap.
const SECTOR_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: usize,
    pub center: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellLayout {
    pub cells: Vec<Cell>,
    pub side_length: f64,
    pub beams_per_cell: usize,
    pub beamwidth: f64,
    pub depot: Point,
}

/// One beam of one cell; `index` selects the sector `[index·θ, (index+1)·θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BeamRef {
    pub cell: usize,
    pub index: usize,
}

/// Unordered pair of mutually interfering beams, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BeamPair {
    pub a: BeamRef,
    pub b: BeamRef,
}

impl BeamPair {
    pub fn new(x: BeamRef, y: BeamRef) -> Self {
        if x <= y {
            BeamPair { a: x, b: y }
        } else {
            BeamPair { a: y, b: x }
        }
    }

    pub fn contains(&self, beam: BeamRef) -> bool {
        self.a == beam || self.b == beam
    }

    pub fn partner(&self, beam: BeamRef) -> Option<BeamRef> {
        if self.a == beam {
            Some(self.b)
        } else if self.b == beam {
            Some(self.a)
        } else {
            None
        }
    }
}

/// Three-cell cloverleaf with the default π/6 beamwidth.
pub fn build_layout(side_length: f64, beams_per_cell: usize) -> Result<CellLayout> {
    CellLayout::cloverleaf(side_length, beams_per_cell, DEFAULT_BEAMWIDTH)
}

pub fn beam_of(point: Point, cell: usize, layout: &CellLayout) -> Result<BeamRef> {
    layout.beam_of(point, cell)
}

impl CellLayout {
    /// Three hexagons sharing one vertex; the shared vertex is the depot and
    /// sits at the origin.
    pub fn cloverleaf(side_length: f64, beams_per_cell: usize, beamwidth: f64) -> Result<Self> {
        check_params(side_length, beams_per_cell, beamwidth)?;
        let cells = [90.0_f64, 210.0, 330.0]
            .iter()
            .enumerate()
            .map(|(id, deg)| Cell { id, center: Point::polar(Point::new(0.0, 0.0), side_length, deg.to_radians()) })
            .collect();
        Ok(CellLayout { cells, side_length, beams_per_cell, beamwidth, depot: Point::new(0.0, 0.0) })
    }

    /// One hexagon centred at the origin, depot on its upper-right vertex.
    pub fn single_cell(side_length: f64, beams_per_cell: usize) -> Result<Self> {
        check_params(side_length, beams_per_cell, DEFAULT_BEAMWIDTH)?;
        Ok(CellLayout {
            cells: vec![Cell { id: 0, center: Point::new(0.0, 0.0) }],
            side_length,
            beams_per_cell,
            beamwidth: DEFAULT_BEAMWIDTH,
            depot: Point::polar(Point::new(0.0, 0.0), side_length, PI / 6.0),
        })
    }

    pub fn cell(&self, id: usize) -> &Cell {
        &self.cells[id]
    }

    /// Pointy-top hexagon of the given cell.
    pub fn hexagon(&self, cell: usize) -> ConvexPolygon {
        let c = self.cells[cell].center;
        ConvexPolygon::new(
            (0..6).map(|k| Point::polar(c, self.side_length, (30.0 + 60.0 * k as f64).to_radians())).collect(),
        )
    }

    pub fn in_coverage(&self, p: Point) -> bool {
        (0..self.cells.len()).any(|c| self.hexagon(c).contains(p, 1e-9 * self.side_length))
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let d = self.cells[a].center.distance(self.cells[b].center);
        d <= 3f64.sqrt() * self.side_length * (1.0 + 1e-9)
    }

    pub fn beam_of(&self, point: Point, cell: usize) -> Result<BeamRef> {
        let center = self.cells[cell].center;
        let rel = point - center;
        if rel.x == 0.0 && rel.y == 0.0 {
            return Err(Error::PointAtBaseStation(cell));
        }
        let mut azimuth = rel.y.atan2(rel.x);
        if azimuth < 0.0 {
            azimuth += TAU;
        }
        let sectors = azimuth / self.beamwidth;
        let nearest = sectors.round();
        let snapped = if (sectors - nearest).abs() < SECTOR_SNAP { nearest } else { sectors.floor() };
        let index = (snapped as usize) % self.beams_per_cell;
        Ok(BeamRef { cell, index })
    }

    /// Nearest base station, ties to the lowest cell id.
    pub fn serving_cell(&self, point: Point) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for cell in &self.cells {
            let d = point.distance(cell.center);
            if d < best_d {
                best_d = d;
                best = cell.id;
            }
        }
        best
    }

    pub fn serving_beam(&self, point: Point) -> Result<BeamRef> {
        self.beam_of(point, self.serving_cell(point))
    }

    pub fn boresight(&self, beam: BeamRef) -> f64 {
        (beam.index as f64 + 0.5) * self.beamwidth
    }

    /// Main-lobe wedge of `beam` truncated at `range`, as a convex polygon.
    pub fn wedge(&self, beam: BeamRef, range: f64) -> ConvexPolygon {
        let c = self.cells[beam.cell].center;
        let start = beam.index as f64 * self.beamwidth;
        let mut vertices = Vec::with_capacity(ARC_SEGMENTS + 2);
        vertices.push(c);
        for s in 0..=ARC_SEGMENTS {
            let a = start + self.beamwidth * s as f64 / ARC_SEGMENTS as f64;
            vertices.push(Point::polar(c, range, a));
        }
        ConvexPolygon::new(vertices)
    }
}

fn check_params(side_length: f64, beams_per_cell: usize, beamwidth: f64) -> Result<()> {
    if !(side_length > 0.0 && side_length.is_finite()) {
        return Err(Error::Layout(format!("side length must be positive, got {side_length}")));
    }
    if beams_per_cell < 3 {
        return Err(Error::Layout(format!("need at least 3 beams per cell, got {beams_per_cell}")));
    }
    if !(beamwidth > 0.0) || (beams_per_cell as f64 * beamwidth - TAU).abs() > 1e-9 {
        return Err(Error::Layout(format!(
            "{beams_per_cell} beams of width {beamwidth:.6} rad do not tile the circle"
        )));
    }
    Ok(())
}

/// Smallest absolute angle between two directions, in `[0, π]`.
fn angle_between(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Mutually interfering beam pairs between adjacent cells.
///
/// A pair qualifies when the two wedges, truncated at `range_limit`, overlap
/// with positive area and the boresights are opposed within one beamwidth.
pub fn interfering_beam_pairs(layout: &CellLayout, range_limit: f64) -> Vec<BeamPair> {
    let mut pairs = Vec::new();
    if !(range_limit > 0.0) {
        return pairs;
    }
    let min_area = AREA_EPS * layout.side_length * layout.side_length;
    let m = layout.beams_per_cell;
    for a in 0..layout.cells.len() {
        for b in a + 1..layout.cells.len() {
            if !layout.adjacent(a, b) {
                continue;
            }
            for ia in 0..m {
                let beam_a = BeamRef { cell: a, index: ia };
                let wedge_a = layout.wedge(beam_a, range_limit);
                for ib in 0..m {
                    let beam_b = BeamRef { cell: b, index: ib };
                    let opposition = angle_between(layout.boresight(beam_a), layout.boresight(beam_b) + PI);
                    if opposition > layout.beamwidth + 1e-9 {
                        continue;
                    }
                    let overlap = wedge_a.intersection(&layout.wedge(beam_b, range_limit));
                    if overlap.area() > min_area {
                        pairs.push(BeamPair::new(beam_a, beam_b));
                    }
                }
            }
        }
    }
    pairs.sort();
    pairs
}

/// Union of pairwise wedge intersections: the area where a node can take
/// part in a communication collision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionRegion {
    pub pieces: Vec<ConvexPolygon>,
}

impl CollisionRegion {
    pub fn new(layout: &CellLayout, pairs: &[BeamPair], range_limit: f64) -> Self {
        let min_area = AREA_EPS * layout.side_length * layout.side_length;
        let pieces = pairs
            .iter()
            .map(|p| layout.wedge(p.a, range_limit).intersection(&layout.wedge(p.b, range_limit)))
            .filter(|poly| poly.area() > min_area)
            .collect();
        CollisionRegion { pieces }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.pieces.iter().any(|poly| poly.contains(p, 0.0))
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn bounds(&self) -> Option<(Point, Point)> {
        self.pieces.iter().map(|p| p.bounds()).reduce(|(lo, hi), (l2, h2)| {
            (Point::new(lo.x.min(l2.x), lo.y.min(l2.y)), Point::new(hi.x.max(h2.x), hi.y.max(h2.y)))
        })
    }
}

/// `h_ij = 1` iff the serving beams of `i` and `j` form an interfering pair.
pub fn collision_matrix(nodes: &NodeSet, layout: &CellLayout, pairs: &[BeamPair]) -> Result<CollisionMatrix> {
    let beams = nodes.nodes.iter().map(|n| layout.serving_beam(n.position())).collect::<Result<Vec<_>>>()?;
    let mut h = CollisionMatrix::empty(nodes.len());
    for (i, bi) in beams.iter().enumerate() {
        for (j, bj) in beams.iter().enumerate().skip(i + 1) {
            if bi.cell != bj.cell && pairs.contains(&BeamPair::new(*bi, *bj)) {
                h.insert(nodes.nodes[i].id, nodes.nodes[j].id);
            }
        }
    }
    Ok(h)
}

/// Travel times over the duplicated-depot node set `0..=v+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelTimes {
    size: usize,
    data: Vec<f64>,
}

impl TravelTimes {
    /// Number of rows, `v + 2`.
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: f64) -> TravelTimes {
        TravelTimes { size: self.size, data: self.data.iter().map(|t| t * factor).collect() }
    }
}

pub fn travel_time_matrix(nodes: &NodeSet, velocity: f64) -> Result<TravelTimes> {
    if !(velocity > 0.0 && velocity.is_finite()) {
        return Err(Error::Parameter(format!("velocity must be positive, got {velocity}")));
    }
    let v = nodes.len();
    let size = v + 2;
    let position = |i: usize| {
        if i == 0 || i == v + 1 {
            nodes.depot
        } else {
            nodes.nodes[i - 1].position()
        }
    };
    let mut data = vec![0.0; size * size];
    for i in 0..size {
        for j in i + 1..size {
            let t = position(i).distance(position(j)) / velocity;
            data[i * size + j] = t;
            data[j * size + i] = t;
        }
    }
    Ok(TravelTimes { size, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Node;

    fn default_layout() -> CellLayout {
        build_layout(50.0, 12).unwrap()
    }

    #[test]
    fn default_layout_shape() {
        let layout = default_layout();
        assert_eq!(layout.cells.len(), 3);
        assert!((layout.beamwidth - PI / 6.0).abs() < 1e-15);
        for c in &layout.cells {
            assert!((c.center.distance(layout.depot) - 50.0).abs() < 1e-9);
        }
        for a in 0..3 {
            for b in a + 1..3 {
                assert!(layout.adjacent(a, b));
                let d = layout.cells[a].center.distance(layout.cells[b].center);
                assert!((d - 50.0 * 3f64.sqrt()).abs() < 1e-9);
            }
            // the depot is a vertex of every hexagon
            let hex = layout.hexagon(a);
            assert!(hex.vertices.iter().any(|v| v.distance(layout.depot) < 1e-9));
        }
    }

    #[test]
    fn beam_count_must_match_beamwidth() {
        assert!(build_layout(50.0, 5).is_err());
        assert!(build_layout(50.0, 2).is_err());
        assert!(build_layout(0.0, 12).is_err());
        assert!(CellLayout::cloverleaf(50.0, 5, TAU / 5.0).is_ok());
    }

    #[test]
    fn layout_scales_linearly() {
        let big = default_layout();
        let small = build_layout(1.0, 12).unwrap();
        for (a, b) in big.cells.iter().zip(&small.cells) {
            assert!((a.center.distance(big.depot) / 50.0 - b.center.distance(small.depot)).abs() < 1e-12);
        }
        assert_eq!(interfering_beam_pairs(&big, 50.0), interfering_beam_pairs(&small, 1.0));
    }

    #[test]
    fn beam_sector_boundaries() {
        let layout = default_layout();
        let c = layout.cells[0].center;
        let at = |az: f64| layout.beam_of(Point::polar(c, 10.0, az), 0).unwrap().index;
        assert_eq!(at(0.1), 0);
        assert_eq!(at(PI / 6.0), 1);
        assert_eq!(at(TAU - 1e-6), 11);
        assert_eq!(at(0.0), 0);
        assert!(matches!(layout.beam_of(c, 0), Err(Error::PointAtBaseStation(0))));
    }

    #[test]
    fn six_pairs_in_default_layout() {
        let layout = default_layout();
        let pairs = interfering_beam_pairs(&layout, 50.0);
        assert_eq!(pairs.len(), 6);
        for a in 0..3 {
            for b in a + 1..3 {
                let n = pairs.iter().filter(|p| p.a.cell == a && p.b.cell == b).count();
                assert_eq!(n, 2, "cells {a},{b}");
            }
        }
        // every beam takes part in at most one pair
        let mut seen = std::collections::BTreeSet::new();
        for p in &pairs {
            assert!(seen.insert(p.a));
            assert!(seen.insert(p.b));
        }
    }

    #[test]
    fn no_pairs_without_neighbours_or_range() {
        let single = CellLayout::single_cell(50.0, 12).unwrap();
        assert!(interfering_beam_pairs(&single, 50.0).is_empty());
        assert!(interfering_beam_pairs(&default_layout(), 0.0).is_empty());
    }

    #[test]
    fn collision_matrix_from_pair_wedges() {
        let layout = default_layout();
        let pairs = interfering_beam_pairs(&layout, 50.0);
        let region = CollisionRegion::new(&layout, &pairs, 50.0);
        let p = pairs[0];
        // centroid of the overlap, nudged toward each base station
        let piece = layout.wedge(p.a, 50.0).intersection(&layout.wedge(p.b, 50.0));
        let n = piece.vertices.len() as f64;
        let centroid = Point::new(
            piece.vertices.iter().map(|v| v.x).sum::<f64>() / n,
            piece.vertices.iter().map(|v| v.y).sum::<f64>() / n,
        );
        assert!(region.contains(centroid));
        let ca = layout.cells[p.a.cell].center;
        let cb = layout.cells[p.b.cell].center;
        let toward = |c: Point| {
            let mut q = centroid;
            for _ in 0..200 {
                if layout.serving_cell(q) == layout.cells.iter().position(|x| x.center == c).unwrap()
                    && layout.wedge(p.a, 50.0).contains(q, 0.0)
                    && layout.wedge(p.b, 50.0).contains(q, 0.0)
                {
                    return q;
                }
                q = Point::new(q.x + 0.02 * (c.x - q.x), q.y + 0.02 * (c.y - q.y));
            }
            panic!("no point found");
        };
        let qa = toward(ca);
        let qb = toward(cb);
        let same_cell = Point::new(qa.x + 0.01 * (ca.x - qa.x), qa.y + 0.01 * (ca.y - qa.y));
        let nodes = NodeSet::new(
            vec![
                Node::new(1, qa, 0.0, 200.0, 2.0),
                Node::new(2, qb, 0.0, 200.0, 2.0),
                Node::new(3, same_cell, 0.0, 200.0, 2.0),
            ],
            layout.depot,
            (0.0, 200.0),
        )
        .unwrap();
        let h = collision_matrix(&nodes, &layout, &pairs).unwrap();
        assert!(h.get(1, 2) && h.get(2, 1));
        assert!(!h.get(1, 3));
        assert!(!h.get(1, 1));
    }

    #[test]
    fn travel_times() {
        let nodes = NodeSet::new(
            vec![
                Node::new(1, Point::new(50.0, 0.0), 0.0, 200.0, 2.0),
                Node::new(2, Point::new(50.0, 30.0), 0.0, 200.0, 2.0),
            ],
            Point::new(0.0, 0.0),
            (0.0, 200.0),
        )
        .unwrap();
        let t = travel_time_matrix(&nodes, 5.0).unwrap();
        assert_eq!(t.size(), 4);
        assert_eq!(t.get(0, 1), 10.0);
        assert_eq!(t.get(1, 2), 6.0);
        assert_eq!(t.get(2, 2), 0.0);
        assert_eq!(t.get(0, 3), 0.0);
        for j in 0..4 {
            assert_eq!(t.get(0, j), t.get(3, j));
        }
        assert!(travel_time_matrix(&nodes, 0.0).is_err());
    }
}
