//! Row sweeps in the lattice frame, whose x axis is the long side of the
//! AOI's minimum rotated rectangle.

use crate::geometry::SQRT_3;
use crate::graph::{CoverageGraph, NodeId};

use super::{hop_distances, walk_from_order, PlanResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepVariant {
    Boustrophedon,
    /// Every row in the same direction, flying back between rows.
    RowOneWay,
    /// Rows split into graph-connected runs, each entered from its end
    /// nearest the current position.
    SegmentSnake,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterleavedVariant {
    RowInterleave,
    SegInterleave,
}

/// Cells binned by lattice-frame `y` at the row pitch `sqrt(3) h`, each row
/// ordered by `x`. Bins are offset by a quarter pitch so that the half-row
/// stagger of odd columns folds into the row below, giving rows of
/// alternately adjacent cells.
pub fn sweep_rows(g: &CoverageGraph) -> Vec<Vec<NodeId>> {
    let pitch = SQRT_3 * g.hex_radius();
    let mut keyed: Vec<(i64, f64, NodeId)> = (0..g.n_cells())
        .map(|v| {
            let p = g.lattice_position(v);
            ((p.y / pitch + 0.25).floor() as i64, p.x, v)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut rows: Vec<Vec<NodeId>> = Vec::new();
    let mut last = None;
    for (bin, _, v) in keyed {
        if last != Some(bin) {
            rows.push(Vec::new());
            last = Some(bin);
        }
        rows.last_mut().expect("row pushed").push(v);
    }
    rows
}

/// Maximal runs of consecutive, graph-adjacent cells within a row.
fn segments(g: &CoverageGraph, row: &[NodeId]) -> Vec<Vec<NodeId>> {
    let mut out: Vec<Vec<NodeId>> = Vec::new();
    for &v in row {
        match out.last_mut() {
            Some(seg) if g.adjacent(*seg.last().expect("non-empty"), v) => seg.push(v),
            _ => out.push(vec![v]),
        }
    }
    out
}

/// Even-indexed rows first, then odd-indexed rows.
fn interleave<T: Clone>(rows: &[T]) -> Vec<T> {
    rows.iter()
        .step_by(2)
        .chain(rows.iter().skip(1).step_by(2))
        .cloned()
        .collect()
}

#[derive(Clone, Copy)]
enum Pattern {
    /// Alternate direction per visited row.
    Snake,
    /// Same direction for every row.
    OneWay,
    /// Alternate per row; each segment from its end nearest the walker.
    Segments,
}

fn order_rows(g: &CoverageGraph, rows: &[Vec<NodeId>], pattern: Pattern, reverse_first: bool) -> Vec<NodeId> {
    let mut order = Vec::with_capacity(g.n_cells());
    let mut here = g.base();
    for (i, row) in rows.iter().enumerate() {
        let backward = match pattern {
            Pattern::OneWay => reverse_first,
            Pattern::Snake | Pattern::Segments => reverse_first ^ (i % 2 == 1),
        };
        let mut row = row.clone();
        if backward {
            row.reverse();
        }
        match pattern {
            Pattern::Snake | Pattern::OneWay => order.extend(row),
            Pattern::Segments => {
                for mut seg in segments(g, &row) {
                    let head = g.position(seg[0]);
                    let tail = g.position(*seg.last().expect("non-empty"));
                    if tail.distance(here) < head.distance(here) {
                        seg.reverse();
                    }
                    here = g.position(*seg.last().expect("non-empty"));
                    order.extend(seg);
                }
            }
        }
    }
    order
}

/// Tries the four sweep orientations (row order up or down, first row
/// forward or backward) and keeps the one whose first cell is fewest hops
/// from `b`; earlier orientations win ties.
fn best_orientation(g: &CoverageGraph, interleaved: bool, pattern: Pattern) -> Vec<NodeId> {
    let hops = hop_distances(g, g.base_node());
    let mut best: Option<(usize, Vec<NodeId>)> = None;
    for reverse_rows in [false, true] {
        let mut rows = sweep_rows(g);
        if reverse_rows {
            rows.reverse();
        }
        if interleaved {
            rows = interleave(&rows);
        }
        for reverse_first in [false, true] {
            let order = order_rows(g, &rows, pattern, reverse_first);
            let cost = hops[order[0]];
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((cost, order));
            }
        }
    }
    best.expect("four candidates").1
}

pub fn plan_linear_sweep(g: &CoverageGraph, variant: SweepVariant) -> PlanResult {
    let pattern = match variant {
        SweepVariant::Boustrophedon => Pattern::Snake,
        SweepVariant::RowOneWay => Pattern::OneWay,
        SweepVariant::SegmentSnake => Pattern::Segments,
    };
    walk_from_order(g, &best_orientation(g, false, pattern))
}

pub fn plan_interleaved(g: &CoverageGraph, variant: InterleavedVariant) -> PlanResult {
    let pattern = match variant {
        InterleavedVariant::RowInterleave => Pattern::Snake,
        InterleavedVariant::SegInterleave => Pattern::Segments,
    };
    walk_from_order(g, &best_orientation(g, true, pattern))
}
