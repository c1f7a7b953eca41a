//! The coverage graph: visitable hex cells plus a departure node `b` and a
//! return node `b'`.
//!
//! Node indices `0..n` are cells in lattice order, `n` is the base and
//! `n + 1` the terminal. Adjacency lists are sorted ascending.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Frame, HexCell, OffsetCoord, Point, SQRT_3};

pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge ({0}, {1}) references a node outside the cell range")]
    EdgeOutOfRange(usize, usize),
    #[error("self loop on cell {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("{0} links are empty")]
    NoLinks(&'static str),
    #[error("{kind} link {cell} is not a cell")]
    LinkOutOfRange { kind: &'static str, cell: usize },
    #[error("edge ({0}, {1}) fails the face-adjacency distance test")]
    NotFaceAdjacent(usize, usize),
    #[error("face-adjacent cells {0} and {1} are not joined by an edge")]
    MissingEdge(usize, usize),
    #[error("graph has no cells")]
    Empty,
    #[error("invalid hex radius {0}")]
    BadRadius(f64),
    #[error("non-finite coordinate on node {0}")]
    NonFinite(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageGraph {
    cells: Vec<HexCell>,
    hex_radius: f64,
    frame: Frame,
    adjacency: Vec<Vec<NodeId>>,
    base: Point,
    terminal: Point,
    base_links: Vec<NodeId>,
    terminal_links: Vec<NodeId>,
}

impl CoverageGraph {
    /// Assembles a graph from explicit parts. Checks index ranges, loops,
    /// duplicates and link sets, but not lattice geometry (see
    /// [`CoverageGraph::check_geometry`]).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        cells: Vec<HexCell>,
        hex_radius: f64,
        frame: Frame,
        edges: &[(usize, usize)],
        base: Point,
        terminal: Point,
        base_links: Vec<usize>,
        terminal_links: Vec<usize>,
    ) -> Result<Self, GraphError> {
        let n = cells.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if !(hex_radius > 0.0 && hex_radius.is_finite()) {
            return Err(GraphError::BadRadius(hex_radius));
        }
        for (i, c) in cells.iter().enumerate() {
            if !c.center.is_finite() {
                return Err(GraphError::NonFinite(i));
            }
        }
        if !base.is_finite() {
            return Err(GraphError::NonFinite(n));
        }
        if !terminal.is_finite() {
            return Err(GraphError::NonFinite(n + 1));
        }
        let mut adjacency = vec![Vec::new(); n + 2];
        let mut seen = BTreeSet::new();
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(GraphError::EdgeOutOfRange(a, b));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(GraphError::DuplicateEdge(a, b));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut link = |kind: &'static str, links: Vec<usize>, node: usize| {
            let links: BTreeSet<usize> = links.into_iter().collect();
            if links.is_empty() {
                return Err(GraphError::NoLinks(kind));
            }
            if let Some(&cell) = links.iter().find(|&&c| c >= n) {
                return Err(GraphError::LinkOutOfRange { kind, cell });
            }
            for &c in &links {
                adjacency[c].push(node);
                adjacency[node].push(c);
            }
            Ok(links.into_iter().collect::<Vec<_>>())
        };
        let base_links = link("base", base_links, n)?;
        let terminal_links = link("terminal", terminal_links, n + 1)?;
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            cells,
            hex_radius,
            frame,
            adjacency,
            base,
            terminal,
            base_links,
            terminal_links,
        })
    }

    /// Builds the face-adjacency graph over a set of lattice cells placed in
    /// `frame`. Cells are indexed in `(col, row)` order.
    pub fn from_lattice(
        coords: &BTreeSet<OffsetCoord>,
        h: f64,
        frame: Frame,
        base: Point,
        terminal: Point,
        base_links: &BTreeSet<OffsetCoord>,
        terminal_links: &BTreeSet<OffsetCoord>,
    ) -> Result<Self, GraphError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(GraphError::BadRadius(h));
        }
        let ordered: Vec<OffsetCoord> = coords.iter().copied().collect();
        let index = |c: &OffsetCoord| ordered.binary_search(c).ok();
        let cells: Vec<HexCell> = ordered
            .iter()
            .map(|&c| HexCell::new(c, frame.to_world(c.center(h)), h))
            .collect();
        let mut edges = Vec::new();
        for (i, c) in ordered.iter().enumerate() {
            for nb in c.neighbors() {
                if let Some(j) = index(&nb) {
                    if i < j {
                        edges.push((i, j));
                    }
                }
            }
        }
        let links = |set: &BTreeSet<OffsetCoord>| set.iter().filter_map(index).collect::<Vec<_>>();
        Self::new(
            cells,
            h,
            frame,
            &edges,
            base,
            terminal,
            links(base_links),
            links(terminal_links),
        )
    }

    /// Every cell-cell edge joins centroids `sqrt(3) h` apart, and every such
    /// pair is joined.
    pub fn check_geometry(&self) -> Result<(), GraphError> {
        let pitch = SQRT_3 * self.hex_radius;
        let n = self.n_cells();
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.cells[i].center.distance(self.cells[j].center);
                let adjacent = ((d - pitch) / pitch).abs() < 1e-9;
                let linked = self.adjacency[i].binary_search(&j).is_ok();
                match (adjacent, linked) {
                    (false, true) => return Err(GraphError::NotFaceAdjacent(i, j)),
                    (true, false) => return Err(GraphError::MissingEdge(i, j)),
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.cells.len() + 2
    }

    pub fn base_node(&self) -> NodeId {
        self.cells.len()
    }

    pub fn terminal_node(&self) -> NodeId {
        self.cells.len() + 1
    }

    pub fn is_cell(&self, v: NodeId) -> bool {
        v < self.cells.len()
    }

    pub fn cells(&self) -> &[HexCell] {
        &self.cells
    }

    pub fn cell(&self, i: NodeId) -> &HexCell {
        &self.cells[i]
    }

    pub fn hex_radius(&self) -> f64 {
        self.hex_radius
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v]
    }

    /// Cell neighbours of `v` (never `b` or `b'`).
    pub fn cell_neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let n = self.cells.len();
        self.adjacency[v].iter().copied().filter(move |&u| u < n)
    }

    pub fn adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacency
            .get(a)
            .is_some_and(|list| list.binary_search(&b).is_ok())
    }

    pub fn base(&self) -> Point {
        self.base
    }

    pub fn terminal(&self) -> Point {
        self.terminal
    }

    pub fn base_links(&self) -> &[NodeId] {
        &self.base_links
    }

    pub fn terminal_links(&self) -> &[NodeId] {
        &self.terminal_links
    }

    /// World position of any node.
    pub fn position(&self, v: NodeId) -> Point {
        let n = self.cells.len();
        if v < n {
            self.cells[v].center
        } else if v == n {
            self.base
        } else {
            self.terminal
        }
    }

    /// Position in the lattice frame (the tessellation's oriented bounding box).
    pub fn lattice_position(&self, v: NodeId) -> Point {
        self.frame.to_local(self.position(v))
    }

    /// Cell-cell edges `(i, j)` with `i < j`, ascending.
    pub fn cell_edges(&self) -> Vec<(usize, usize)> {
        let n = self.cells.len();
        (0..n)
            .flat_map(|i| {
                self.adjacency[i]
                    .iter()
                    .copied()
                    .filter(move |&j| j < n && i < j)
                    .map(move |j| (i, j))
            })
            .collect()
    }

    /// Is the cell-induced subgraph connected?
    pub fn cells_connected(&self) -> bool {
        let n = self.cells.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for u in self.cell_neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == n
    }

    /// Applies `f` to every node position. Used to check that metrics are
    /// invariant under rigid motions and scaling.
    pub fn map_positions(&self, f: impl Fn(Point) -> Point, radius_scale: f64) -> Self {
        let mut g = self.clone();
        for c in &mut g.cells {
            c.center = f(c.center);
            c.circumradius *= radius_scale;
        }
        g.hex_radius *= radius_scale;
        g.base = f(g.base);
        g.terminal = f(g.terminal);
        g
    }
}

/// Small hand-built graphs for tests, examples and documentation.
pub mod fixtures {
    use super::*;

    /// Graph over arbitrary adjacency with cells laid out on a circle.
    pub fn abstract_graph(
        n: usize,
        edges: &[(usize, usize)],
        base_links: &[usize],
        terminal_links: &[usize],
    ) -> CoverageGraph {
        let cells = (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n.max(1) as f64;
                HexCell::new(OffsetCoord::new(i as i32, 0), Point::new(a.cos(), a.sin()), 1.0)
            })
            .collect();
        CoverageGraph::new(
            cells,
            1.0,
            Frame::IDENTITY,
            edges,
            Point::new(0.0, -3.0),
            Point::new(0.0, -3.0),
            base_links.to_vec(),
            terminal_links.to_vec(),
        )
        .expect("valid fixture")
    }

    /// Lattice graph over `coords` with `b` and `b'` sharing one point and
    /// one link set.
    pub fn lattice_graph(coords: &[(i32, i32)], links: &[(i32, i32)], base: Point) -> CoverageGraph {
        let set: BTreeSet<OffsetCoord> = coords.iter().map(|&(c, r)| OffsetCoord::new(c, r)).collect();
        let links: BTreeSet<OffsetCoord> = links.iter().map(|&(c, r)| OffsetCoord::new(c, r)).collect();
        CoverageGraph::from_lattice(&set, 1.0, Frame::IDENTITY, base, base, &links, &links)
            .expect("valid fixture")
    }

    /// A single lattice column `(0, 0) .. (0, n-1)` with the base below cell
    /// 0 and the terminal above cell `n - 1`.
    pub fn column_path(n: usize) -> CoverageGraph {
        let set: BTreeSet<OffsetCoord> = (0..n as i32).map(|r| OffsetCoord::new(0, r)).collect();
        let first: BTreeSet<OffsetCoord> = [OffsetCoord::new(0, 0)].into();
        let last: BTreeSet<OffsetCoord> = [OffsetCoord::new(0, n as i32 - 1)].into();
        CoverageGraph::from_lattice(
            &set,
            1.0,
            Frame::IDENTITY,
            Point::new(0.0, -SQRT_3),
            Point::new(0.0, SQRT_3 * n as f64),
            &first,
            &last,
        )
        .expect("valid fixture")
    }

    /// Seven-cell flower: centre `(1, 1)` plus its six neighbours.
    pub fn flower() -> CoverageGraph {
        let center = OffsetCoord::new(1, 1);
        let mut coords: Vec<(i32, i32)> = center.neighbors().iter().map(|c| (c.col, c.row)).collect();
        coords.push((1, 1));
        let bottom = OffsetCoord::new(1, 0);
        let base = bottom.center(1.0) - Point::new(0.0, 2.0);
        lattice_graph(&coords, &[(bottom.col, bottom.row)], base)
    }
}
