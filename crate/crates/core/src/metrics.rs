//! Walk validation, per-walk quality metrics, and per-method aggregation.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CoverageGraph, NodeId};
use crate::planners::PlannerId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Every cell exactly once, ending at `b'`.
    HamiltonianSuccess,
    /// Every cell at least once, ending at `b'`.
    CoverageSuccess,
    Fail,
}

impl Status {
    pub const ALL: [Status; 3] = [Status::HamiltonianSuccess, Status::CoverageSuccess, Status::Fail];

    pub fn name(self) -> &'static str {
        match self {
            Status::HamiltonianSuccess => "hamiltonian_success",
            Status::CoverageSuccess => "coverage_success",
            Status::Fail => "fail",
        }
    }

    pub fn is_hamiltonian(self) -> bool {
        self == Status::HamiltonianSuccess
    }

    pub fn is_covered(self) -> bool {
        self != Status::Fail
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Status {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Status::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown status {s:?}"))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WalkError {
    #[error("walk is empty")]
    Empty,
    #[error("walk starts at node {0}, not at the base")]
    BadStart(NodeId),
    #[error("node {node} at position {position} does not exist")]
    UnknownNode { position: usize, node: NodeId },
    #[error("nodes {from} and {to} at positions {position}..{} are not adjacent", position + 1)]
    NotAdjacent { position: usize, from: NodeId, to: NodeId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Validation {
    pub status: Status,
    /// Internal-cell visits beyond the first, summed over cells.
    pub revisits: usize,
    pub distinct_cells: usize,
}

/// Classifies a walk. Only adjacency violations are errors; an incomplete
/// or misdirected walk is a valid walk with status [`Status::Fail`].
pub fn validate_path(g: &CoverageGraph, walk: &[NodeId]) -> Result<Validation, WalkError> {
    let first = *walk.first().ok_or(WalkError::Empty)?;
    if first != g.base_node() {
        return Err(WalkError::BadStart(first));
    }
    let n = g.n_cells();
    for (position, pair) in walk.windows(2).enumerate() {
        let (from, to) = (pair[0], pair[1]);
        if to >= g.n_nodes() {
            return Err(WalkError::UnknownNode { position: position + 1, node: to });
        }
        if !g.adjacent(from, to) {
            return Err(WalkError::NotAdjacent { position, from, to });
        }
    }
    let mut seen = vec![false; n];
    let mut visits = 0usize;
    let mut distinct = 0usize;
    for &v in walk {
        if v < n {
            visits += 1;
            if !seen[v] {
                seen[v] = true;
                distinct += 1;
            }
        }
    }
    let revisits = visits - distinct;
    let ends = walk.last() == Some(&g.terminal_node());
    let status = if distinct == n && ends {
        if revisits == 0 && walk.len() == n + 2 {
            Status::HamiltonianSuccess
        } else {
            Status::CoverageSuccess
        }
    } else {
        Status::Fail
    };
    Ok(Validation {
        status,
        revisits,
        distinct_cells: distinct,
    })
}

/// Largest centre-to-base distance over the cells.
fn base_radius(g: &CoverageGraph) -> f64 {
    let b = g.base();
    g.cells().iter().map(|c| c.center.distance(b)).fold(0.0, f64::max)
}

/// Walk length after centring on the base and scaling by the largest
/// cell-to-base distance.
pub fn path_distance(g: &CoverageGraph, walk: &[NodeId]) -> f64 {
    let r = base_radius(g);
    let b = g.base();
    let p = |v: NodeId| (g.position(v) - b) * (1.0 / r);
    walk.windows(2).map(|w| p(w[0]).distance(p(w[1]))).sum()
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Cumulative absolute heading change in radians, entry and exit segments
/// included. Zero-length segments carry no heading and are skipped.
pub fn path_turns(g: &CoverageGraph, walk: &[NodeId]) -> f64 {
    let tol = 1e-12 * base_radius(g).max(g.hex_radius());
    let mut prev: Option<f64> = None;
    let mut total = 0.0;
    for (i, w) in walk.windows(2).enumerate() {
        let d = g.position(w[1]) - g.position(w[0]);
        if d.norm() <= tol {
            log::debug!("zero-length segment {}->{} at step {i} ignored for turning", w[0], w[1]);
            continue;
        }
        let heading = d.y.atan2(d.x);
        if let Some(h0) = prev {
            total += wrap_angle(heading - h0).abs();
        }
        prev = Some(heading);
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathMetrics {
    pub status: Status,
    pub revisits: usize,
    pub distance_norm: f64,
    pub turns_rad: f64,
    pub latency_ms: f64,
}

/// Validates a walk and computes its metrics.
pub fn evaluate_walk(g: &CoverageGraph, walk: &[NodeId], latency_ms: f64) -> Result<PathMetrics, WalkError> {
    let v = validate_path(g, walk)?;
    Ok(PathMetrics {
        status: v.status,
        revisits: v.revisits,
        distance_norm: path_distance(g, walk),
        turns_rad: path_turns(g, walk),
        latency_ms,
    })
}

/// Mean and sample standard deviation. The deviation needs two samples.
pub fn mean_sd(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: PlannerId,
    pub instances: usize,
    pub hsr_pct: f64,
    pub ccr_pct: f64,
    /// Quality statistics over the coverage-complete subset; absent when
    /// that subset is too small.
    pub revisits_mean: Option<f64>,
    pub revisits_sd: Option<f64>,
    pub distance_mean: Option<f64>,
    pub distance_sd: Option<f64>,
    pub turns_mean: Option<f64>,
    pub turns_sd: Option<f64>,
    /// Mean over every instance.
    pub latency_mean_ms: f64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AggregateError {
    #[error("no results to aggregate")]
    Empty,
    #[error("duplicate result for {method} on {instance}")]
    Duplicate { method: String, instance: String },
    #[error("incomplete result matrix; missing {}", format_missing(.missing))]
    Incomplete { missing: Vec<(String, String)> },
}

fn format_missing(missing: &[(String, String)]) -> String {
    const SHOWN: usize = 8;
    let mut s: Vec<String> = missing.iter().take(SHOWN).map(|(m, i)| format!("{m}@{i}")).collect();
    if missing.len() > SHOWN {
        s.push(format!("and {} more", missing.len() - SHOWN));
    }
    s.join(", ")
}

/// One evaluated (instance, method) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation<'a> {
    pub instance: &'a str,
    pub method: PlannerId,
    pub metrics: PathMetrics,
}

/// Per-method summaries in [`PlannerId::ALL`] order. Every method present
/// must have a result for every instance present.
pub fn aggregate_summary(results: &[Evaluation<'_>]) -> Result<Vec<SummaryRow>, AggregateError> {
    if results.is_empty() {
        return Err(AggregateError::Empty);
    }
    let mut by_method: BTreeMap<PlannerId, BTreeMap<&str, PathMetrics>> = BTreeMap::new();
    let mut instances: BTreeSet<&str> = BTreeSet::new();
    for r in results {
        instances.insert(r.instance);
        if by_method.entry(r.method).or_default().insert(r.instance, r.metrics).is_some() {
            return Err(AggregateError::Duplicate {
                method: r.method.to_string(),
                instance: r.instance.to_string(),
            });
        }
    }
    let mut missing = Vec::new();
    for (m, rows) in &by_method {
        for i in &instances {
            if !rows.contains_key(i) {
                missing.push((m.to_string(), i.to_string()));
            }
        }
    }
    if !missing.is_empty() {
        return Err(AggregateError::Incomplete { missing });
    }
    Ok(by_method
        .into_iter()
        .map(|(method, rows)| summarize(method, rows.values()))
        .collect())
}

fn summarize<'a>(method: PlannerId, rows: impl Iterator<Item = &'a PathMetrics>) -> SummaryRow {
    let rows: Vec<&PathMetrics> = rows.collect();
    let n = rows.len();
    let covered: Vec<&PathMetrics> = rows.iter().copied().filter(|m| m.status.is_covered()).collect();
    let ham = rows.iter().filter(|m| m.status.is_hamiltonian()).count();
    let pct = |k: usize| 100.0 * k as f64 / n as f64;
    let stat = |f: fn(&PathMetrics) -> f64| mean_sd(&covered.iter().map(|m| f(m)).collect::<Vec<_>>());
    let (revisits_mean, revisits_sd) = stat(|m| m.revisits as f64);
    let (distance_mean, distance_sd) = stat(|m| m.distance_norm);
    let (turns_mean, turns_sd) = stat(|m| m.turns_rad);
    SummaryRow {
        method,
        instances: n,
        hsr_pct: pct(ham),
        ccr_pct: pct(covered.len()),
        revisits_mean,
        revisits_sd,
        distance_mean,
        distance_sd,
        turns_mean,
        turns_sd,
        latency_mean_ms: rows.iter().map(|m| m.latency_ms).sum::<f64>() / n as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Frame, HexCell, OffsetCoord, Point};
    use crate::graph::fixtures::{column_path, flower, lattice_graph};
    use crate::oracle::hamiltonian_audit;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// The seven-cell flower with a second link, which makes it Hamiltonian.
    fn open_flower() -> CoverageGraph {
        let g = flower();
        let coords: Vec<(i32, i32)> = g.cells().iter().map(|c| (c.coord.col, c.coord.row)).collect();
        lattice_graph(&coords, &[(1, 0), (0, 0)], g.base())
    }

    /// Set-and-count recomputation used as the reference classifier.
    fn naive(g: &CoverageGraph, walk: &[NodeId]) -> Option<(Status, usize)> {
        if walk.first() != Some(&g.base_node()) {
            return None;
        }
        for w in walk.windows(2) {
            if !g.neighbors(w[0]).contains(&w[1]) {
                return None;
            }
        }
        let cells: Vec<NodeId> = walk.iter().copied().filter(|&v| g.is_cell(v)).collect();
        let set: BTreeSet<NodeId> = cells.iter().copied().collect();
        let revisits = cells.len() - set.len();
        let full = set.len() == g.n_cells();
        let ends = *walk.last().unwrap() == g.terminal_node();
        let exact = walk.len() == g.n_cells() + 2 && revisits == 0;
        let status = match (full && ends, exact) {
            (true, true) => Status::HamiltonianSuccess,
            (true, false) => Status::CoverageSuccess,
            _ => Status::Fail,
        };
        Some((status, revisits))
    }

    #[test]
    fn path_fixture_statuses() {
        let g = column_path(3);
        let (b, t) = (g.base_node(), g.terminal_node());
        let v = validate_path(&g, &[b, 0, 1, 2, t]).unwrap();
        assert_eq!((v.status, v.revisits), (Status::HamiltonianSuccess, 0));
        let v = validate_path(&g, &[b, 0, 1, 0, 1, 2, t]).unwrap();
        assert_eq!((v.status, v.revisits), (Status::CoverageSuccess, 2));
        let v = validate_path(&g, &[b, 0, 1]).unwrap();
        assert_eq!(v.status, Status::Fail);
        assert!(matches!(validate_path(&g, &[b, 0, 2]), Err(WalkError::NotAdjacent { position: 1, .. })));
        assert_eq!(validate_path(&g, &[0, 1]), Err(WalkError::BadStart(0)));
        assert_eq!(validate_path(&g, &[]), Err(WalkError::Empty));
    }

    #[test]
    fn one_repeat_counts_once() {
        let g = open_flower();
        let w = hamiltonian_audit(&g, None).witness.unwrap();
        assert_eq!(validate_path(&g, &w).unwrap().status, Status::HamiltonianSuccess);
        let mut w2 = w.clone();
        // Step back to the previous cell and forward again: one repeat of
        // each, two revisits.
        w2.insert(2, w[1]);
        w2.insert(2, w[2]);
        let v = validate_path(&g, &w2).unwrap();
        assert_eq!((v.status, v.revisits), (Status::CoverageSuccess, 2));
    }

    #[test]
    fn agrees_with_naive_checker_on_random_walks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let graphs = [column_path(4), flower(), column_path(1)];
        for i in 0..10_000 {
            let g = &graphs[i % graphs.len()];
            let mut walk = vec![g.base_node()];
            let len = rng.random_range(0..14);
            for _ in 0..len {
                let cur = *walk.last().unwrap();
                let nb = g.neighbors(cur);
                // Occasionally jump to an arbitrary node to exercise rejection.
                let next = if rng.random_bool(0.03) {
                    rng.random_range(0..g.n_nodes())
                } else {
                    nb[rng.random_range(0..nb.len())]
                };
                walk.push(next);
            }
            let expect = naive(g, &walk);
            let got = validate_path(g, &walk).ok().map(|v| (v.status, v.revisits));
            assert_eq!(got, expect, "walk {walk:?}");
        }
    }

    #[test]
    fn farthest_cell_segment_is_unit_length() {
        let g = column_path(5);
        let far = (0..g.n_cells())
            .max_by(|&a, &b| {
                let d = |v: usize| g.cell(v).center.distance(g.base());
                d(a).total_cmp(&d(b))
            })
            .unwrap();
        // Base to farthest cell is not an edge, but the metric is geometric.
        assert!((path_distance(&g, &[g.base_node(), far]) - 1.0).abs() < 1e-12);
    }

    fn transformed(g: &CoverageGraph, rot: f64, scale: f64, shift: Point) -> CoverageGraph {
        g.map_positions(move |p| p.rotate(rot) * scale + shift, scale)
    }

    #[test]
    fn distance_and_turns_invariance() {
        let g = open_flower();
        let w = hamiltonian_audit(&g, None).witness.unwrap();
        let d0 = path_distance(&g, &w);
        let t0 = path_turns(&g, &w);
        for (rot, scale, shift) in [
            (0.0, 1.0, Point::new(13.0, -7.0)),
            (1.1, 1.0, Point::ORIGIN),
            (0.0, 5.0, Point::ORIGIN),
            (-2.4, 0.3, Point::new(-1e3, 42.0)),
        ] {
            let h = transformed(&g, rot, scale, shift);
            assert!((path_distance(&h, &w) - d0).abs() < 1e-9);
            assert!((path_turns(&h, &w) - t0).abs() < 1e-9);
        }
    }

    #[test]
    fn collinear_walk_has_no_turning() {
        let g = column_path(4);
        let (b, t) = (g.base_node(), g.terminal_node());
        assert!(path_turns(&g, &[b, 0, 1, 2, 3, t]).abs() < 1e-12);
    }

    fn ring_graph() -> CoverageGraph {
        // Six cells around an empty centre: the neighbours of (1, 1).
        let centre = OffsetCoord::new(1, 1);
        let coords: Vec<OffsetCoord> = centre.neighbors().to_vec();
        let links = [coords[0]];
        let set: BTreeSet<OffsetCoord> = coords.iter().copied().collect();
        let link_set: BTreeSet<OffsetCoord> = links.iter().copied().collect();
        let base = Point::new(10.0, 10.0);
        CoverageGraph::from_lattice(&set, 1.0, Frame::IDENTITY, base, base, &link_set, &link_set).unwrap()
    }

    #[test]
    fn sixty_degree_turn_and_hexagon_loop() {
        let g = ring_graph();
        let centre = OffsetCoord::new(1, 1).center(1.0);
        let angle = |v: usize| {
            let d = g.cell(v).center - centre;
            d.y.atan2(d.x)
        };
        let mut ring: Vec<usize> = (0..6).collect();
        ring.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
        // Two consecutive ring steps turn by exactly pi/3.
        let turn = path_turns(&g, &[g.base_node(), ring[0], ring[1], ring[2]]);
        let entry = path_turns(&g, &[g.base_node(), ring[0], ring[1]]);
        assert!((turn - entry - PI / 3.0).abs() < 1e-9);
        // c0..c5, c0, c1 closes the loop: six turns of pi/3. Drop the entry
        // turn, which `path_turns` includes.
        let mut lap = vec![g.base_node()];
        lap.extend(ring.iter().copied());
        lap.extend([ring[0], ring[1]]);
        let total = path_turns(&g, &lap);
        assert!((total - entry - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(0.25)).abs() - 0.25 < 1e-15);
    }

    #[test]
    fn zero_length_segments_are_ignored() {
        // Two cells stacked on one point: the 0 -> 1 segment has no heading,
        // leaving the half-turn between entry and exit.
        let cells = vec![
            HexCell::new(OffsetCoord::new(0, 0), Point::ORIGIN, 1.0),
            HexCell::new(OffsetCoord::new(0, 1), Point::ORIGIN, 1.0),
        ];
        let b = Point::new(0.0, -2.0);
        let g = CoverageGraph::new(cells, 1.0, Frame::IDENTITY, &[(0, 1)], b, b, vec![0], vec![1]).unwrap();
        let t = path_turns(&g, &[g.base_node(), 0, 1, g.terminal_node()]);
        assert!((t - PI).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn mean_sd_matches_two_pass(xs in proptest::collection::vec(-1e3f64..1e3, 2..40)) {
            let (m, s) = mean_sd(&xs);
            let m = m.unwrap();
            let s = s.unwrap();
            let n = xs.len() as f64;
            let m2 = xs.iter().sum::<f64>() / n;
            let ss: f64 = xs.iter().map(|x| x * x).sum::<f64>() - n * m2 * m2;
            prop_assert!((m - m2).abs() < 1e-9);
            prop_assert!((s * s - ss / (n - 1.0)).abs() < 1e-6 * (1.0 + ss.abs()));
        }
    }

    fn pm(status: Status, revisits: usize) -> PathMetrics {
        PathMetrics {
            status,
            revisits,
            distance_norm: 3.0,
            turns_rad: 40.0,
            latency_ms: 1.0,
        }
    }

    #[test]
    fn aggregation_rates_and_conditional_stats() {
        let ids = ["a", "b", "c", "d"];
        let mut rows = Vec::new();
        for (k, id) in ids.iter().enumerate() {
            rows.push(Evaluation {
                instance: id,
                method: PlannerId::WarnsdorffTiIndex,
                metrics: pm(if k < 3 { Status::HamiltonianSuccess } else { Status::Fail }, 0),
            });
            rows.push(Evaluation {
                instance: id,
                method: PlannerId::Boustrophedon,
                metrics: pm(Status::CoverageSuccess, 2 * k),
            });
            rows.push(Evaluation {
                instance: id,
                method: PlannerId::StcTree,
                metrics: pm(Status::Fail, 0),
            });
        }
        let out = aggregate_summary(&rows).unwrap();
        let w = out.iter().find(|r| r.method == PlannerId::WarnsdorffTiIndex).unwrap();
        assert_eq!((w.hsr_pct, w.ccr_pct), (75.0, 75.0));
        assert_eq!(w.revisits_mean, Some(0.0));
        let b = out.iter().find(|r| r.method == PlannerId::Boustrophedon).unwrap();
        assert_eq!((b.hsr_pct, b.ccr_pct), (0.0, 100.0));
        assert_eq!(b.revisits_mean, Some(3.0));
        // Sample SD of 0, 2, 4, 6.
        assert!((b.revisits_sd.unwrap() - (20.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let s = out.iter().find(|r| r.method == PlannerId::StcTree).unwrap();
        assert_eq!((s.hsr_pct, s.ccr_pct, s.revisits_mean), (0.0, 0.0, None));
    }

    #[test]
    fn aggregation_rejects_holes_in_the_matrix() {
        let rows = vec![
            Evaluation {
                instance: "a",
                method: PlannerId::Morton,
                metrics: pm(Status::CoverageSuccess, 1),
            },
            Evaluation {
                instance: "b",
                method: PlannerId::Morton,
                metrics: pm(Status::CoverageSuccess, 1),
            },
            Evaluation {
                instance: "a",
                method: PlannerId::WavefrontHex,
                metrics: pm(Status::CoverageSuccess, 1),
            },
        ];
        match aggregate_summary(&rows) {
            Err(AggregateError::Incomplete { missing }) => {
                assert_eq!(missing, vec![("wavefront-hex".to_string(), "b".to_string())]);
            }
            other => panic!("{other:?}"),
        }
        let dup = vec![rows[0].clone(), rows[0].clone()];
        assert!(matches!(aggregate_summary(&dup), Err(AggregateError::Duplicate { .. })));
        assert_eq!(aggregate_summary(&[]), Err(AggregateError::Empty));
    }
}
