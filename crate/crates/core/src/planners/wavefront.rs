//! Wavefront planner: descend a BFS distance field grown from the cells
//! next to `b'`, so the walk drifts toward the exit as it covers.

use std::collections::VecDeque;

use crate::graph::{CoverageGraph, NodeId};

use super::{hop_distances, FailReason, PlanResult, Tracker};

/// Hop distance from the terminal frontier (cells adjacent to `b'`, label
/// 0) through cells; `usize::MAX` marks unreachable cells.
pub fn wavefront_labels(g: &CoverageGraph) -> Vec<usize> {
    let mut label = vec![usize::MAX; g.n_cells()];
    let mut queue = VecDeque::new();
    for &c in g.terminal_links() {
        label[c] = 0;
        queue.push_back(c);
    }
    while let Some(v) = queue.pop_front() {
        for u in g.cell_neighbors(v) {
            if label[u] == usize::MAX {
                label[u] = label[v] + 1;
                queue.push_back(u);
            }
        }
    }
    label
}

pub fn plan_wavefront(g: &CoverageGraph) -> PlanResult {
    let label = wavefront_labels(g);
    let reachable = |v: NodeId| label[v] != usize::MAX;
    let mut t = Tracker::new(g);
    // Enter at the base link farthest up the field.
    let entry = g
        .base_links()
        .iter()
        .copied()
        .filter(|&v| reachable(v))
        .min_by_key(|&v| (std::cmp::Reverse(label[v]), v));
    let Some(entry) = entry else {
        return PlanResult::fail(t.walk, FailReason::Unreachable);
    };
    t.step(entry);
    while t.remaining > 0 {
        let v = t.current();
        let here = t.position();
        let open = |j: NodeId| g.cell_neighbors(j).filter(|&k| k != v && !t.is_covered(k)).count();
        let mut best: Option<(std::cmp::Reverse<usize>, usize, f64, NodeId)> = None;
        for j in g.cell_neighbors(v).filter(|&j| !t.is_covered(j)) {
            let key = (std::cmp::Reverse(label[j]), open(j), here.distance(g.position(j)), j);
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
        if let Some((_, _, _, j)) = best {
            t.step(j);
            continue;
        }
        // Stuck: bridge to the highest-labelled uncovered cell, preferring
        // the shorter connector.
        let hops = hop_distances(g, v);
        let target = (0..g.n_cells())
            .filter(|&u| !t.is_covered(u) && hops[u] != usize::MAX)
            .min_by_key(|&u| (std::cmp::Reverse(label[u]), hops[u], u));
        match target {
            Some(u) if t.travel(u) => {}
            _ => return PlanResult::fail(t.walk, FailReason::Unreachable),
        }
    }
    t.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{column_path, flower};
    use crate::metrics::Status;

    #[test]
    fn labels_count_layers_from_the_frontier() {
        let g = column_path(5);
        assert_eq!(wavefront_labels(&g), vec![4, 3, 2, 1, 0]);
        let g = flower();
        let l = wavefront_labels(&g);
        for &c in g.terminal_links() {
            assert_eq!(l[c], 0);
        }
        for (a, b) in g.cell_edges() {
            assert!(l[a].abs_diff(l[b]) <= 1);
        }
    }

    #[test]
    fn path_descends_monotonically() {
        let g = column_path(5);
        let r = plan_wavefront(&g);
        assert_eq!(r.walk, vec![5, 0, 1, 2, 3, 4, 6]);
        assert_eq!(r.status, Status::HamiltonianSuccess);
    }

    #[test]
    fn flower_is_covered() {
        let g = flower();
        let r = plan_wavefront(&g);
        assert!(r.status.is_covered());
    }
}
