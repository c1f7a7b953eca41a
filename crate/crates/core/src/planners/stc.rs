//! Spanning-tree coverage: build a tree over the cells and walk around it.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::graph::{CoverageGraph, NodeId};

use super::{argmin_by, FailReason, PlanResult, Tracker};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StcVariant {
    /// Plain BFS tree; a non-spanning tree is a failure.
    StcTree,
    /// Nearest-first tree, with greedy shortest-path bridges to any cells
    /// the tree missed.
    StcLike,
}

/// Children lists indexed by node, in discovery order.
type Tree = Vec<Vec<NodeId>>;

fn bfs_tree(g: &CoverageGraph, root: NodeId, allowed: &[bool]) -> (Tree, usize) {
    let mut children = vec![Vec::new(); g.n_cells()];
    let mut seen = vec![false; g.n_cells()];
    seen[root] = true;
    let mut size = 1;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for u in g.cell_neighbors(v) {
            if allowed[u] && !seen[u] {
                seen[u] = true;
                size += 1;
                children[v].push(u);
                queue.push_back(u);
            }
        }
    }
    (children, size)
}

#[derive(PartialEq)]
struct Frontier {
    dist: f64,
    node: NodeId,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on (distance to root, index).
        other.dist.total_cmp(&self.dist).then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Best-first tree: always expands the discovered cell nearest the root.
fn nearest_first_tree(g: &CoverageGraph, root: NodeId, allowed: &[bool]) -> (Tree, usize) {
    let origin = g.position(root);
    let mut children = vec![Vec::new(); g.n_cells()];
    let mut seen = vec![false; g.n_cells()];
    seen[root] = true;
    let mut size = 1;
    let mut heap = BinaryHeap::from([Frontier { dist: 0.0, node: root }]);
    while let Some(Frontier { node: v, .. }) = heap.pop() {
        for u in g.cell_neighbors(v) {
            if allowed[u] && !seen[u] {
                seen[u] = true;
                size += 1;
                children[v].push(u);
                heap.push(Frontier {
                    dist: g.position(u).distance(origin),
                    node: u,
                });
            }
        }
    }
    (children, size)
}

/// Depth-first circumnavigation from `root` back to `root`, retracing each
/// tree edge on the way back.
fn circumnavigate(t: &mut Tracker<'_>, tree: &Tree, root: NodeId) {
    let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
    while let Some(&mut (v, ref mut next)) = stack.last_mut() {
        if let Some(&c) = tree[v].get(*next) {
            *next += 1;
            t.step(c);
            stack.push((c, 0));
        } else {
            stack.pop();
            if let Some(&(parent, _)) = stack.last() {
                t.step(parent);
            }
        }
    }
}

/// The cell nearest the base, ties to the lower index.
fn root_cell(g: &CoverageGraph) -> NodeId {
    let cells: Vec<NodeId> = (0..g.n_cells()).collect();
    let d = |v: &NodeId| g.position(*v).distance(g.base());
    argmin_by(&cells, |a, b| d(a).total_cmp(&d(b)).then(a.cmp(b)).is_lt()).expect("graph has cells")
}

pub fn plan_stc(g: &CoverageGraph, variant: StcVariant) -> PlanResult {
    let root = root_cell(g);
    let mut t = Tracker::new(g);
    match variant {
        StcVariant::StcTree => {
            let allowed = vec![true; g.n_cells()];
            let (tree, size) = bfs_tree(g, root, &allowed);
            if size < g.n_cells() {
                return PlanResult::fail(t.walk, FailReason::TreeNotSpanning);
            }
            if !t.travel(root) {
                return PlanResult::fail(t.walk, FailReason::Unreachable);
            }
            circumnavigate(&mut t, &tree, root);
        }
        StcVariant::StcLike => {
            let mut root = root;
            loop {
                if !t.travel(root) {
                    return PlanResult::fail(t.walk, FailReason::Unreachable);
                }
                let uncovered: Vec<bool> = (0..g.n_cells()).map(|v| !t.is_covered(v) || v == root).collect();
                let (tree, _) = nearest_first_tree(g, root, &uncovered);
                circumnavigate(&mut t, &tree, root);
                if t.remaining == 0 {
                    break;
                }
                // Bridge to the uncovered cell fewest hops away.
                let hops = super::hop_distances(g, t.current());
                let rest: Vec<NodeId> = (0..g.n_cells()).filter(|&v| !t.is_covered(v)).collect();
                root = match argmin_by(&rest, |a, b| (hops[*a], *a) < (hops[*b], *b)) {
                    Some(v) if hops[v] != usize::MAX => v,
                    _ => return PlanResult::fail(t.walk, FailReason::Unreachable),
                };
            }
        }
    }
    t.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{abstract_graph, column_path, flower};
    use crate::metrics::{validate_path, Status};

    #[test]
    fn path_graph_tour() {
        // b below cell 0, b' above cell 3: tour 0 1 2 3 2 1 0, then back up.
        let g = column_path(4);
        for variant in [StcVariant::StcTree, StcVariant::StcLike] {
            let r = plan_stc(&g, variant);
            assert_eq!(r.walk, vec![4, 0, 1, 2, 3, 2, 1, 0, 1, 2, 3, 5]);
            let v = validate_path(&g, &r.walk).unwrap();
            // Circumnavigation alone: 2n - 2 steps and n - 1 revisits; the
            // exit back to b' adds three more.
            assert_eq!(v.revisits, 3 + 3);
            assert_eq!(r.status, Status::CoverageSuccess);
        }
    }

    #[test]
    fn flower_revisits_are_n_minus_one_plus_exit() {
        let g = flower();
        let r = plan_stc(&g, StcVariant::StcTree);
        let v = validate_path(&g, &r.walk).unwrap();
        // The tour returns to the root, which is the base link and b' is
        // attached there, so the exit adds nothing.
        assert_eq!(v.revisits, g.n_cells() - 1);
    }

    #[test]
    fn non_spanning_tree_fails() {
        let g = abstract_graph(3, &[(0, 1)], &[0], &[1]);
        let r = plan_stc(&g, StcVariant::StcTree);
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.fail_reason, Some(FailReason::TreeNotSpanning));
        assert_eq!(r.walk, vec![g.base_node()]);
        let r = plan_stc(&g, StcVariant::StcLike);
        assert_eq!(r.status, Status::Fail);
        validate_path(&g, &r.walk).unwrap();
    }

    #[test]
    fn nearest_first_tree_spans() {
        let g = flower();
        let allowed = vec![true; 7];
        let (tree, size) = nearest_first_tree(&g, 0, &allowed);
        assert_eq!(size, 7);
        assert_eq!(tree.iter().map(Vec::len).sum::<usize>(), 6);
    }
}
