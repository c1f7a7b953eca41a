//! Greedy minimum-residual-degree planners.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::graph::{CoverageGraph, NodeId};

use super::{FailReason, PlanResult, Tracker};
use crate::metrics::Status;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Policy {
    /// Endpoint-aware: `b'` is left out of residual degrees while more than
    /// one target remains.
    Ep,
    /// Terminal-inclusive: `b'` always counts toward residual degree.
    Ti,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TieBreak {
    /// Lowest node index.
    Index,
    /// Shortest Euclidean move, then lowest index.
    Distance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WarnsdorffConfig {
    pub policy: Policy,
    pub tie_break: TieBreak,
}

/// Warnsdorff's rule toward a fixed terminal: repeatedly move to the
/// unvisited cell with the fewest onward options. No backtracking.
pub fn plan_warnsdorff(g: &CoverageGraph, cfg: WarnsdorffConfig) -> PlanResult {
    let n = g.n_cells();
    let terminal = g.terminal_node();
    let mut visited = vec![false; n];
    let mut walk = vec![g.base_node()];
    let mut v = g.base_node();
    let mut targets = n;
    while targets > 0 {
        let count_terminal = cfg.policy == Policy::Ti || targets <= 1;
        let here = g.position(v);
        let mut best: Option<(usize, f64, NodeId)> = None;
        for j in g.cell_neighbors(v) {
            if visited[j] {
                continue;
            }
            let d = g
                .neighbors(j)
                .iter()
                .filter(|&&k| k != v && ((k < n && !visited[k]) || (k == terminal && count_terminal)))
                .count();
            let t = match cfg.tie_break {
                TieBreak::Index => 0.0,
                TieBreak::Distance => here.distance(g.position(j)),
            };
            let better = match best {
                None => true,
                Some(b) => (d, t, j) < b,
            };
            if better {
                best = Some((d, t, j));
            }
        }
        let Some((_, _, j)) = best else {
            return PlanResult::fail(walk, FailReason::DeadEnd);
        };
        visited[j] = true;
        targets -= 1;
        walk.push(j);
        v = j;
    }
    if !g.adjacent(v, terminal) {
        return PlanResult::fail(walk, FailReason::TerminalUnreachable);
    }
    walk.push(terminal);
    PlanResult {
        walk,
        status: Status::HamiltonianSuccess,
        fail_reason: None,
    }
}

/// Greedy depth-first extension by plain unvisited-neighbour count; at a
/// dead end, retreat through visited cells to the nearest one with an
/// unvisited neighbour.
pub fn plan_dfs_backtrack(g: &CoverageGraph) -> PlanResult {
    let n = g.n_cells();
    let mut t = Tracker::new(g);
    while t.remaining > 0 {
        let v = t.current();
        let open = |t: &Tracker<'_>, j: NodeId| g.cell_neighbors(j).filter(|&k| k != v && !t.is_covered(k)).count();
        let next = g
            .cell_neighbors(v)
            .filter(|&j| !t.is_covered(j))
            .min_by_key(|&j| (open(&t, j), j));
        match next {
            Some(j) => t.step(j),
            None => match retreat(g, &t, v) {
                Some(path) => {
                    for u in path.into_iter().skip(1) {
                        t.step(u);
                    }
                }
                None => return PlanResult::fail(t.walk, FailReason::Unreachable),
            },
        }
        debug_assert!(t.walk.len() <= 4 * n * n + 2);
    }
    t.finish()
}

/// BFS over visited cells from `v` to the nearest visited cell that still
/// has an unvisited neighbour.
fn retreat(g: &CoverageGraph, t: &Tracker<'_>, v: NodeId) -> Option<Vec<NodeId>> {
    let mut parent = vec![usize::MAX; g.n_nodes()];
    parent[v] = v;
    let mut queue = VecDeque::from([v]);
    while let Some(x) = queue.pop_front() {
        if x != v && g.cell_neighbors(x).any(|k| !t.is_covered(k)) {
            let mut path = vec![x];
            let mut y = x;
            while y != v {
                y = parent[y];
                path.push(y);
            }
            path.reverse();
            return Some(path);
        }
        for u in g.cell_neighbors(x) {
            if parent[u] == usize::MAX && t.is_covered(u) {
                parent[u] = x;
                queue.push_back(u);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{abstract_graph, column_path};
    use crate::metrics::validate_path;

    const ALL: [WarnsdorffConfig; 4] = [
        WarnsdorffConfig { policy: Policy::Ep, tie_break: TieBreak::Index },
        WarnsdorffConfig { policy: Policy::Ep, tie_break: TieBreak::Distance },
        WarnsdorffConfig { policy: Policy::Ti, tie_break: TieBreak::Index },
        WarnsdorffConfig { policy: Policy::Ti, tie_break: TieBreak::Distance },
    ];

    #[test]
    fn path_graph_succeeds_under_every_config() {
        let g = column_path(3);
        for cfg in ALL {
            let r = plan_warnsdorff(&g, cfg);
            assert_eq!(r.walk, vec![3, 0, 1, 2, 4]);
            assert_eq!(r.status, Status::HamiltonianSuccess);
        }
    }

    /// Cells: v=0 (entry), j1=1, j2=2, a=3, c=4, e=5.
    /// Edges: v-j1, v-j2, j1-a, j2-c, j2-e, a-c, c-e. Terminal links: j1, a.
    /// From v, candidates are j1 and j2 (targets = 5 remaining).
    /// j1: unvisited {a} plus b' -> EP 1, TI 2. j2: {c, e} -> 2 either way.
    fn ep_ti_fixture() -> CoverageGraph {
        abstract_graph(6, &[(0, 1), (0, 2), (1, 3), (2, 4), (2, 5), (3, 4), (4, 5)], &[0], &[1, 3])
    }

    #[test]
    fn ep_and_ti_disagree_on_the_first_choice() {
        let g = ep_ti_fixture();
        let ep = plan_warnsdorff(&g, WarnsdorffConfig { policy: Policy::Ep, tie_break: TieBreak::Index });
        let ti = plan_warnsdorff(&g, WarnsdorffConfig { policy: Policy::Ti, tie_break: TieBreak::Index });
        // EP: d = (1, 2), picks j1. TI: d = (2, 2), and the index tie-break
        // happens to pick j1 as well.
        assert_eq!(ep.walk[2], 1);
        assert_eq!(ti.walk[2], 1);
        // Reorder indices so that j2 has the lower index: now TI with index
        // ties moves to j2 while EP still prefers j1.
        let g = abstract_graph(6, &[(0, 2), (0, 1), (2, 3), (1, 4), (1, 5), (3, 4), (4, 5)], &[0], &[2, 3]);
        let ep = plan_warnsdorff(&g, WarnsdorffConfig { policy: Policy::Ep, tie_break: TieBreak::Index });
        let ti = plan_warnsdorff(&g, WarnsdorffConfig { policy: Policy::Ti, tie_break: TieBreak::Index });
        assert_eq!(ep.walk[2], 2);
        assert_eq!(ti.walk[2], 1);
        for r in [&ep, &ti] {
            assert_eq!(validate_path(&g, &r.walk).unwrap().status, r.status);
        }
    }

    #[test]
    fn terminal_is_never_taken_early() {
        // 0 is adjacent to b' and to 1; 1 is a dead end away from b'.
        let g = abstract_graph(2, &[(0, 1)], &[0], &[0]);
        for cfg in ALL {
            let r = plan_warnsdorff(&g, cfg);
            assert_eq!(r.walk, vec![2, 0, 1]);
            assert_eq!(r.fail_reason, Some(FailReason::TerminalUnreachable));
        }
    }

    #[test]
    fn dead_end_is_reported() {
        // Star: centre 0 with leaves 1, 2, 3.
        let g = abstract_graph(4, &[(0, 1), (0, 2), (0, 3)], &[0], &[3]);
        let r = plan_warnsdorff(&g, ALL[2]);
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.fail_reason, Some(FailReason::DeadEnd));
        validate_path(&g, &r.walk).unwrap();
    }

    #[test]
    fn backtrack_path_is_hamiltonian() {
        let g = column_path(5);
        let r = plan_dfs_backtrack(&g);
        assert_eq!(r.status, Status::HamiltonianSuccess);
    }

    #[test]
    fn backtrack_t_shape_retreats_once() {
        // T: 0 - 1 - 2 with a stem 1 - 3 - 4; enter at 0, leave at 4.
        let g = abstract_graph(5, &[(0, 1), (1, 2), (1, 3), (3, 4)], &[0], &[4]);
        let r = plan_dfs_backtrack(&g);
        // 0, 1, then 2 (open count 0 beats 3's 1), back through 1, on to 3, 4.
        assert_eq!(r.walk, vec![5, 0, 1, 2, 1, 3, 4, 6]);
        let v = validate_path(&g, &r.walk).unwrap();
        assert_eq!((v.status, v.revisits), (Status::CoverageSuccess, 1));
    }
}
