//! The seventeen deterministic coverage heuristics behind one interface.
//!
//! Every planner starts at `b`, must end at `b'`, and emits a walk whose
//! consecutive nodes are adjacent. Reconnection-based planners fix up gaps
//! with [`bfs_shortest_path`]; the greedy Warnsdorff family never does.

mod contour;
mod greedy;
mod morton;
mod stc;
mod sweep;
mod wavefront;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::graph::{CoverageGraph, NodeId};
use crate::metrics::{validate_path, Status};

pub use contour::{onion_layers, plan_contour, ContourVariant};
pub use greedy::{plan_dfs_backtrack, plan_warnsdorff, Policy, TieBreak, WarnsdorffConfig};
pub use morton::{morton_code, morton_order, plan_morton, quantize};
pub use stc::{plan_stc, StcVariant};
pub use sweep::{plan_interleaved, plan_linear_sweep, sweep_rows, InterleavedVariant, SweepVariant};
pub use wavefront::{plan_wavefront, wavefront_labels};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    LinearSweep,
    Interleaved,
    Contour,
    Stc,
    Graph,
    Wavefront,
    SpaceFilling,
}

impl Family {
    pub fn title(self) -> &'static str {
        match self {
            Family::LinearSweep => "Linear Sweep",
            Family::Interleaved => "Interleaved",
            Family::Contour => "Contour",
            Family::Stc => "STC",
            Family::Graph => "Graph",
            Family::Wavefront => "Wavefront",
            Family::SpaceFilling => "Space-filling",
        }
    }
}

/// Planner identifiers. Declaration order is the reporting order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PlannerId {
    #[serde(rename = "warnsdorff-ti-index")]
    WarnsdorffTiIndex,
    #[serde(rename = "warnsdorff-ti-dist")]
    WarnsdorffTiDist,
    #[serde(rename = "warnsdorff-ep-index")]
    WarnsdorffEpIndex,
    #[serde(rename = "dfs-backtrack")]
    DfsBacktrack,
    #[serde(rename = "warnsdorff-ep-dist")]
    WarnsdorffEpDist,
    #[serde(rename = "boustrophedon")]
    Boustrophedon,
    #[serde(rename = "row-oneway")]
    RowOneWay,
    #[serde(rename = "segment-snake")]
    SegmentSnake,
    #[serde(rename = "row-interleave")]
    RowInterleave,
    #[serde(rename = "seg-interleave")]
    SegInterleave,
    #[serde(rename = "spiral-outward")]
    SpiralOutward,
    #[serde(rename = "spiral-inward")]
    SpiralInward,
    #[serde(rename = "boundary-peel")]
    BoundaryPeel,
    #[serde(rename = "stc-tree")]
    StcTree,
    #[serde(rename = "stc-like")]
    StcLike,
    #[serde(rename = "wavefront-hex")]
    WavefrontHex,
    #[serde(rename = "morton")]
    Morton,
}

impl PlannerId {
    pub const ALL: [PlannerId; 17] = [
        PlannerId::WarnsdorffTiIndex,
        PlannerId::WarnsdorffTiDist,
        PlannerId::WarnsdorffEpIndex,
        PlannerId::DfsBacktrack,
        PlannerId::WarnsdorffEpDist,
        PlannerId::Boustrophedon,
        PlannerId::RowOneWay,
        PlannerId::SegmentSnake,
        PlannerId::RowInterleave,
        PlannerId::SegInterleave,
        PlannerId::SpiralOutward,
        PlannerId::SpiralInward,
        PlannerId::BoundaryPeel,
        PlannerId::StcTree,
        PlannerId::StcLike,
        PlannerId::WavefrontHex,
        PlannerId::Morton,
    ];

    /// The Warnsdorff slice in policy-major order.
    pub const WARNSDORFF: [PlannerId; 4] = [
        PlannerId::WarnsdorffEpIndex,
        PlannerId::WarnsdorffEpDist,
        PlannerId::WarnsdorffTiIndex,
        PlannerId::WarnsdorffTiDist,
    ];

    /// Canonical identifier used in files and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            PlannerId::WarnsdorffTiIndex => "warnsdorff-ti-index",
            PlannerId::WarnsdorffTiDist => "warnsdorff-ti-dist",
            PlannerId::WarnsdorffEpIndex => "warnsdorff-ep-index",
            PlannerId::DfsBacktrack => "dfs-backtrack",
            PlannerId::WarnsdorffEpDist => "warnsdorff-ep-dist",
            PlannerId::Boustrophedon => "boustrophedon",
            PlannerId::RowOneWay => "row-oneway",
            PlannerId::SegmentSnake => "segment-snake",
            PlannerId::RowInterleave => "row-interleave",
            PlannerId::SegInterleave => "seg-interleave",
            PlannerId::SpiralOutward => "spiral-outward",
            PlannerId::SpiralInward => "spiral-inward",
            PlannerId::BoundaryPeel => "boundary-peel",
            PlannerId::StcTree => "stc-tree",
            PlannerId::StcLike => "stc-like",
            PlannerId::WavefrontHex => "wavefront-hex",
            PlannerId::Morton => "morton",
        }
    }

    /// Display name for reports.
    pub fn title(self) -> &'static str {
        match self {
            PlannerId::WarnsdorffTiIndex => "Warnsdorff-TI (index)",
            PlannerId::WarnsdorffTiDist => "Warnsdorff-TI (dist.)",
            PlannerId::WarnsdorffEpIndex => "Warnsdorff-EP (index)",
            PlannerId::DfsBacktrack => "DFS-Backtrack",
            PlannerId::WarnsdorffEpDist => "Warnsdorff-EP (dist.)",
            PlannerId::Boustrophedon => "Boustrophedon",
            PlannerId::RowOneWay => "Row-OneWay",
            PlannerId::SegmentSnake => "Segment-Snake",
            PlannerId::RowInterleave => "Row-Interleave",
            PlannerId::SegInterleave => "Seg.-Interleave",
            PlannerId::SpiralOutward => "Spiral-Outward",
            PlannerId::SpiralInward => "Spiral-Inward",
            PlannerId::BoundaryPeel => "Boundary-Peel",
            PlannerId::StcTree => "STC-Tree",
            PlannerId::StcLike => "STC-Like",
            PlannerId::WavefrontHex => "Wavefront-Hex",
            PlannerId::Morton => "Morton Z-order",
        }
    }

    pub fn family(self) -> Family {
        use PlannerId::*;
        match self {
            WarnsdorffTiIndex | WarnsdorffTiDist | WarnsdorffEpIndex | WarnsdorffEpDist | DfsBacktrack => {
                Family::Graph
            }
            Boustrophedon | RowOneWay | SegmentSnake => Family::LinearSweep,
            RowInterleave | SegInterleave => Family::Interleaved,
            SpiralOutward | SpiralInward | BoundaryPeel => Family::Contour,
            StcTree | StcLike => Family::Stc,
            WavefrontHex => Family::Wavefront,
            Morton => Family::SpaceFilling,
        }
    }

    pub fn warnsdorff_config(self) -> Option<WarnsdorffConfig> {
        let cfg = |policy, tie_break| Some(WarnsdorffConfig { policy, tie_break });
        match self {
            PlannerId::WarnsdorffTiIndex => cfg(Policy::Ti, TieBreak::Index),
            PlannerId::WarnsdorffTiDist => cfg(Policy::Ti, TieBreak::Distance),
            PlannerId::WarnsdorffEpIndex => cfg(Policy::Ep, TieBreak::Index),
            PlannerId::WarnsdorffEpDist => cfg(Policy::Ep, TieBreak::Distance),
            _ => None,
        }
    }

    /// Planners that bridge gaps with shortest-path reconnections and so
    /// cover every connected graph (STC-Tree modulo a non-spanning tree).
    pub fn is_reconnecting(self) -> bool {
        !matches!(self.family(), Family::Graph)
    }
}

impl fmt::Display for PlannerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown method {name:?}; valid methods: {}", PlannerId::ALL.map(|p| p.name()).join(", "))]
pub struct UnknownPlanner {
    pub name: String,
}

impl FromStr for PlannerId {
    type Err = UnknownPlanner;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PlannerId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| UnknownPlanner { name: s.to_string() })
    }
}

/// Parses a comma-separated method list; `all` selects every planner.
pub fn parse_methods(list: &str) -> Result<Vec<PlannerId>, UnknownPlanner> {
    if list.trim() == "all" {
        return Ok(PlannerId::ALL.to_vec());
    }
    let mut out: Vec<PlannerId> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailReason {
    DeadEnd,
    TerminalUnreachable,
    TreeNotSpanning,
    Unreachable,
}

impl FailReason {
    pub fn name(self) -> &'static str {
        match self {
            FailReason::DeadEnd => "dead-end",
            FailReason::TerminalUnreachable => "terminal-unreachable",
            FailReason::TreeNotSpanning => "tree-not-spanning",
            FailReason::Unreachable => "unreachable",
        }
    }
}

impl fmt::Display for FailReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanResult {
    pub walk: Vec<NodeId>,
    pub status: Status,
    pub fail_reason: Option<FailReason>,
}

impl PlanResult {
    fn fail(walk: Vec<NodeId>, reason: FailReason) -> Self {
        Self {
            walk,
            status: Status::Fail,
            fail_reason: Some(reason),
        }
    }

    /// Status taken from validating the walk itself.
    fn classified(g: &CoverageGraph, walk: Vec<NodeId>) -> Self {
        let status = validate_path(g, &walk).expect("planner emitted a non-adjacent step").status;
        let fail_reason = (status == Status::Fail).then_some(FailReason::Unreachable);
        Self {
            walk,
            status,
            fail_reason,
        }
    }
}

/// A planner result with the wall-clock time of the planner body.
#[derive(Clone, Debug, PartialEq)]
pub struct Planned {
    pub result: PlanResult,
    pub latency_ms: f64,
}

/// Runs one planner without timing.
pub fn run_planner(g: &CoverageGraph, id: PlannerId) -> PlanResult {
    if let Some(cfg) = id.warnsdorff_config() {
        return plan_warnsdorff(g, cfg);
    }
    match id {
        PlannerId::DfsBacktrack => plan_dfs_backtrack(g),
        PlannerId::Boustrophedon => plan_linear_sweep(g, SweepVariant::Boustrophedon),
        PlannerId::RowOneWay => plan_linear_sweep(g, SweepVariant::RowOneWay),
        PlannerId::SegmentSnake => plan_linear_sweep(g, SweepVariant::SegmentSnake),
        PlannerId::RowInterleave => plan_interleaved(g, InterleavedVariant::RowInterleave),
        PlannerId::SegInterleave => plan_interleaved(g, InterleavedVariant::SegInterleave),
        PlannerId::SpiralOutward => plan_contour(g, ContourVariant::SpiralOutward),
        PlannerId::SpiralInward => plan_contour(g, ContourVariant::SpiralInward),
        PlannerId::BoundaryPeel => plan_contour(g, ContourVariant::BoundaryPeel),
        PlannerId::StcTree => plan_stc(g, StcVariant::StcTree),
        PlannerId::StcLike => plan_stc(g, StcVariant::StcLike),
        PlannerId::WavefrontHex => plan_wavefront(g),
        PlannerId::Morton => plan_morton(g),
        _ => unreachable!("Warnsdorff ids are dispatched above"),
    }
}

/// Runs one planner and times it with a monotonic clock.
pub fn plan(g: &CoverageGraph, id: PlannerId) -> Planned {
    let start = Instant::now();
    let result = run_planner(g, id);
    let latency_ms = start.elapsed().as_secs_f64() * 1e3;
    Planned { result, latency_ms }
}

/// Minimum-hop path from `from` to `to` whose interior nodes satisfy
/// `traversable`. Adjacency lists are sorted and the queue is FIFO, so among
/// equal-length paths the one through lower indices wins.
pub fn bfs_shortest_path(
    g: &CoverageGraph,
    from: NodeId,
    to: NodeId,
    traversable: impl Fn(NodeId) -> bool,
) -> Option<Vec<NodeId>> {
    if from == to {
        return Some(vec![from]);
    }
    let mut parent = vec![usize::MAX; g.n_nodes()];
    parent[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        for &u in g.neighbors(v) {
            if parent[u] != usize::MAX {
                continue;
            }
            if u == to {
                parent[u] = v;
                let mut path = vec![to];
                let mut x = v;
                while x != from {
                    path.push(x);
                    x = parent[x];
                }
                path.push(from);
                path.reverse();
                return Some(path);
            }
            if traversable(u) {
                parent[u] = v;
                queue.push_back(u);
            }
        }
    }
    None
}

/// Hop distances from `from` through cells; `usize::MAX` when unreachable.
pub(crate) fn hop_distances(g: &CoverageGraph, from: NodeId) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.n_nodes()];
    dist[from] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        for u in g.cell_neighbors(v) {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Builds a walk from `b`, tracking which cells are covered.
pub(crate) struct Tracker<'g> {
    pub g: &'g CoverageGraph,
    pub walk: Vec<NodeId>,
    pub covered: Vec<bool>,
    pub remaining: usize,
}

impl<'g> Tracker<'g> {
    pub fn new(g: &'g CoverageGraph) -> Self {
        Self {
            g,
            walk: vec![g.base_node()],
            covered: vec![false; g.n_cells()],
            remaining: g.n_cells(),
        }
    }

    pub fn current(&self) -> NodeId {
        *self.walk.last().expect("walk starts at b")
    }

    pub fn position(&self) -> Point {
        self.g.position(self.current())
    }

    pub fn is_covered(&self, v: NodeId) -> bool {
        v < self.covered.len() && self.covered[v]
    }

    /// Appends a node adjacent to the current one.
    pub fn step(&mut self, v: NodeId) {
        debug_assert!(self.g.adjacent(self.current(), v), "{} -> {v}", self.current());
        self.walk.push(v);
        if v < self.covered.len() && !self.covered[v] {
            self.covered[v] = true;
            self.remaining -= 1;
        }
    }

    /// Shortest path through cells to `to`. Returns false if unreachable.
    pub fn travel(&mut self, to: NodeId) -> bool {
        let g = self.g;
        match bfs_shortest_path(g, self.current(), to, |v| g.is_cell(v)) {
            Some(path) => {
                for v in path.into_iter().skip(1) {
                    self.step(v);
                }
                true
            }
            None => false,
        }
    }

    /// Returns to `b'` and classifies the walk.
    pub fn finish(mut self) -> PlanResult {
        let t = self.g.terminal_node();
        if !self.travel(t) {
            return PlanResult::fail(self.walk, FailReason::Unreachable);
        }
        PlanResult::classified(self.g, self.walk)
    }
}

/// Visits cells in `order`, skipping those already covered and bridging
/// gaps with shortest paths, then returns to `b'`.
pub fn walk_from_order(g: &CoverageGraph, order: &[NodeId]) -> PlanResult {
    let mut t = Tracker::new(g);
    for &v in order {
        if !t.is_covered(v) && !t.travel(v) {
            return PlanResult::fail(t.walk, FailReason::Unreachable);
        }
    }
    if t.remaining > 0 {
        return PlanResult::fail(t.walk, FailReason::Unreachable);
    }
    t.finish()
}

/// Index of the minimum under `key`, ties to the earliest.
pub(crate) fn argmin_by<T: Copy>(items: &[T], mut less: impl FnMut(&T, &T) -> bool) -> Option<T> {
    let mut best: Option<T> = None;
    for x in items {
        match best {
            Some(b) if !less(x, &b) => {}
            _ => best = Some(*x),
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{abstract_graph, column_path, flower};

    #[test]
    fn seventeen_unique_names_round_trip() {
        let names: std::collections::BTreeSet<&str> = PlannerId::ALL.iter().map(|p| p.name()).collect();
        assert_eq!(names.len(), 17);
        for p in PlannerId::ALL {
            assert_eq!(p.name().parse::<PlannerId>().unwrap(), p);
            let json = serde_json::to_string(&p).unwrap();
            assert_eq!(json, format!("\"{}\"", p.name()));
        }
        let err = "warnsdorff".parse::<PlannerId>().unwrap_err();
        assert!(err.to_string().contains("wavefront-hex"));
        let reconnecting = PlannerId::ALL.iter().filter(|p| p.is_reconnecting()).count();
        assert_eq!(reconnecting, 12);
        assert_eq!(PlannerId::ALL.iter().filter(|p| p.warnsdorff_config().is_some()).count(), 4);
    }

    #[test]
    fn method_lists() {
        assert_eq!(parse_methods("all").unwrap().len(), 17);
        assert_eq!(
            parse_methods("morton, boustrophedon,morton").unwrap(),
            vec![PlannerId::Boustrophedon, PlannerId::Morton]
        );
        assert!(parse_methods("morton,nope").is_err());
    }

    #[test]
    fn bfs_trivial_cases() {
        let g = column_path(3);
        assert_eq!(bfs_shortest_path(&g, 1, 1, |_| true), Some(vec![1]));
        assert_eq!(bfs_shortest_path(&g, 0, 2, |_| true), Some(vec![0, 1, 2]));
        assert_eq!(bfs_shortest_path(&g, 0, 2, |v| v != 1), None);
    }

    #[test]
    fn bfs_prefers_lower_index_side_of_a_ring() {
        let edges: Vec<(usize, usize)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        let g = abstract_graph(6, &edges, &[0], &[3]);
        // Both 0-1-2-3 and 0-5-4-3 have three hops.
        let p = bfs_shortest_path(&g, 0, 3, |v| g.is_cell(v)).unwrap();
        assert_eq!(p, vec![0, 1, 2, 3]);
        let p = bfs_shortest_path(&g, 3, 0, |v| g.is_cell(v)).unwrap();
        assert_eq!(p, vec![3, 2, 1, 0]);
    }

    #[test]
    fn every_planner_on_fixtures_emits_valid_walks() {
        for g in [column_path(1), column_path(5), flower()] {
            for id in PlannerId::ALL {
                let a = run_planner(&g, id);
                let b = run_planner(&g, id);
                assert_eq!(a, b, "{id}");
                let v = validate_path(&g, &a.walk).unwrap();
                assert_eq!(v.status, a.status, "{id}");
                if id.is_reconnecting() {
                    assert!(a.status.is_covered(), "{id}");
                }
                if id.warnsdorff_config().is_some() {
                    assert_ne!(a.status, Status::CoverageSuccess);
                }
            }
        }
    }

    #[test]
    fn walk_from_order_skips_covered_cells() {
        let edges: Vec<(usize, usize)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        let g = abstract_graph(6, &edges, &[0], &[3]);
        let (b, t) = (g.base_node(), g.terminal_node());
        // Reaching 5 from 2 backtracks through 1 and 0; 4 and 3 follow.
        let r = walk_from_order(&g, &[2, 5, 0, 4, 3]);
        assert_eq!(r.walk, vec![b, 0, 1, 2, 1, 0, 5, 4, 3, t]);
        assert_eq!(r.status, Status::CoverageSuccess);
        let r = walk_from_order(&g, &[1, 0, 2]);
        assert_eq!(r.status, Status::Fail);
    }

    #[test]
    fn argmin_keeps_first_tie() {
        let v = [(1, 'a'), (0, 'b'), (0, 'c')];
        assert_eq!(argmin_by(&v, |x, y| x.0 < y.0), Some((0, 'b')));
    }
}
