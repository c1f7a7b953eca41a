//! Onion-peel contour planners.

use crate::geometry::{centroid, Point};
use crate::graph::{CoverageGraph, NodeId};

use super::{argmin_by, walk_from_order, PlanResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContourVariant {
    SpiralInward,
    SpiralOutward,
    BoundaryPeel,
}

/// One onion layer: the cells of the remaining set with fewer than six
/// remaining neighbours, and the remaining set's centroid at peel time.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub cells: Vec<NodeId>,
    pub centroid: Point,
}

/// Peels the cell set from the outside in.
pub fn onion_layers(g: &CoverageGraph) -> Vec<Layer> {
    let n = g.n_cells();
    let mut remaining = vec![true; n];
    let mut left = n;
    let mut layers = Vec::new();
    while left > 0 {
        let alive: Vec<NodeId> = (0..n).filter(|&v| remaining[v]).collect();
        let pts: Vec<Point> = alive.iter().map(|&v| g.position(v)).collect();
        let cells: Vec<NodeId> = alive
            .iter()
            .copied()
            .filter(|&v| g.cell_neighbors(v).filter(|&u| remaining[u]).count() < 6)
            .collect();
        assert!(!cells.is_empty(), "a finite cell set always has a boundary");
        for &v in &cells {
            remaining[v] = false;
        }
        left -= cells.len();
        layers.push(Layer {
            cells,
            centroid: centroid(&pts),
        });
    }
    layers
}

/// Counter-clockwise about the layer's centroid, rotated to start at the
/// cell nearest `from`.
fn angular(g: &CoverageGraph, layer: &Layer, from: Point) -> Vec<NodeId> {
    let c = layer.centroid;
    let angle = |v: NodeId| {
        let d = g.position(v) - c;
        d.y.atan2(d.x)
    };
    let mut ring = layer.cells.clone();
    ring.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)).then(a.cmp(&b)));
    let start = nearest(g, &ring, from).expect("layers are non-empty");
    let k = ring.iter().position(|&v| v == start).expect("start is in the ring");
    ring.rotate_left(k);
    ring
}

/// Cell of `set` nearest to `p`, ties to the lower index.
fn nearest(g: &CoverageGraph, set: &[NodeId], p: Point) -> Option<NodeId> {
    let d = |v: &NodeId| g.position(*v).distance(p);
    argmin_by(set, |a, b| d(a).total_cmp(&d(b)).then(a.cmp(b)).is_lt())
}

/// Within one layer: keep stepping to an adjacent unvisited layer cell with
/// the fewest unvisited layer neighbours; jump to the nearest unvisited
/// layer cell when stuck.
fn adjacency_first(g: &CoverageGraph, layer: &Layer, from: Point) -> Vec<NodeId> {
    let n = g.n_cells();
    let mut in_layer = vec![false; n];
    for &v in &layer.cells {
        in_layer[v] = true;
    }
    let open = |in_layer: &[bool], v: NodeId| g.cell_neighbors(v).filter(|&u| in_layer[u]).count();
    let mut order = Vec::with_capacity(layer.cells.len());
    let mut cur = nearest(g, &layer.cells, from).expect("layers are non-empty");
    loop {
        in_layer[cur] = false;
        order.push(cur);
        let next: Vec<NodeId> = g.cell_neighbors(cur).filter(|&u| in_layer[u]).collect();
        let step = argmin_by(&next, |a, b| {
            open(&in_layer, *a).cmp(&open(&in_layer, *b)).then(a.cmp(b)).is_lt()
        });
        cur = match step {
            Some(v) => v,
            None => {
                let rest: Vec<NodeId> = layer.cells.iter().copied().filter(|&v| in_layer[v]).collect();
                match nearest(g, &rest, g.position(cur)) {
                    Some(v) => v,
                    None => break,
                }
            }
        };
    }
    order
}

pub fn plan_contour(g: &CoverageGraph, variant: ContourVariant) -> PlanResult {
    let mut layers = onion_layers(g);
    let mut here = match variant {
        ContourVariant::SpiralOutward => {
            let pts: Vec<Point> = g.cells().iter().map(|c| c.center).collect();
            centroid(&pts)
        }
        _ => g.base(),
    };
    if variant == ContourVariant::SpiralOutward {
        layers.reverse();
    }
    let mut order = Vec::with_capacity(g.n_cells());
    for layer in &layers {
        let part = match variant {
            ContourVariant::BoundaryPeel => adjacency_first(g, layer, here),
            _ => angular(g, layer, here),
        };
        here = g.position(*part.last().expect("layers are non-empty"));
        order.extend(part);
    }
    walk_from_order(g, &order)
}
