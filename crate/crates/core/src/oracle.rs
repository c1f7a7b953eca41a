//! Exact Hamiltonian feasibility: does a path `b, v1, ..., vn, b'` visit every
//! cell exactly once?
//!
//! The audit is a depth-first search with backtracking over 128-bit cell
//! sets. Children are tried in ascending residual degree, then ascending
//! index. Three soundness-preserving prunes can be toggled independently:
//!
//! * connectivity: every unvisited cell must be reachable from the current
//!   frontier through unvisited cells;
//! * degree: an unvisited cell with at most one unvisited neighbour can only
//!   be the first or last cell of the remaining path;
//! * terminal reachability: some unvisited cell must still link to `b'`.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CoverageGraph, NodeId};

/// Largest graph the bitset search supports.
pub const MAX_AUDIT_CELLS: usize = 128;
/// Largest graph the permutation enumerator accepts.
pub const MAX_BRUTE_FORCE_CELLS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("graph has {cells} cells, limit is {limit}")]
    TooLarge { cells: usize, limit: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feasibility {
    Feasible,
    Infeasible,
    /// The expansion budget ran out before the search completed.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditResult {
    pub outcome: Feasibility,
    /// `b, v1..vn, b'` when feasible.
    pub witness: Option<Vec<NodeId>>,
    pub nodes_expanded: u64,
    pub elapsed_ms: f64,
}

impl AuditResult {
    pub fn feasible(&self) -> bool {
        self.outcome == Feasibility::Feasible
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pruning {
    pub connectivity: bool,
    pub degree: bool,
    pub terminal_reach: bool,
}

impl Pruning {
    pub const ALL: Pruning = Pruning {
        connectivity: true,
        degree: true,
        terminal_reach: true,
    };
    pub const NONE: Pruning = Pruning {
        connectivity: false,
        degree: false,
        terminal_reach: false,
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuditOptions {
    pub budget: Option<u64>,
    pub pruning: Pruning,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            budget: None,
            pruning: Pruning::ALL,
        }
    }
}

/// Exact audit with every prune enabled. With `budget = None` the search is
/// complete; an exhausted budget yields [`Feasibility::Inconclusive`], as
/// does a graph beyond [`MAX_AUDIT_CELLS`].
pub fn hamiltonian_audit(g: &CoverageGraph, budget: Option<u64>) -> AuditResult {
    audit_with(g, AuditOptions {
        budget,
        pruning: Pruning::ALL,
    })
    .unwrap_or(AuditResult {
        outcome: Feasibility::Inconclusive,
        witness: None,
        nodes_expanded: 0,
        elapsed_ms: 0.0,
    })
}

pub fn audit_with(g: &CoverageGraph, opts: AuditOptions) -> Result<AuditResult, OracleError> {
    let n = g.n_cells();
    if n > MAX_AUDIT_CELLS {
        return Err(OracleError::TooLarge {
            cells: n,
            limit: MAX_AUDIT_CELLS,
        });
    }
    let start = Instant::now();
    if !g.cells_connected() {
        return Ok(AuditResult {
            outcome: Feasibility::Infeasible,
            witness: None,
            nodes_expanded: 0,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    let mut search = Search::new(g, opts);
    let all: u128 = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    let found = search.dfs(None, all);
    let outcome = match found {
        Step::Found => Feasibility::Feasible,
        Step::Exhausted => Feasibility::Infeasible,
        Step::OutOfBudget => Feasibility::Inconclusive,
    };
    let witness = (outcome == Feasibility::Feasible).then(|| {
        let mut w = Vec::with_capacity(n + 2);
        w.push(g.base_node());
        w.extend(search.path.iter().copied());
        w.push(g.terminal_node());
        w
    });
    Ok(AuditResult {
        outcome,
        witness,
        nodes_expanded: search.expanded,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    Found,
    Exhausted,
    OutOfBudget,
}

struct Search {
    nbr: Vec<u128>,
    base: u128,
    term: u128,
    opts: AuditOptions,
    expanded: u64,
    path: Vec<NodeId>,
}

#[inline]
fn bit(i: usize) -> u128 {
    1u128 << i
}

fn bits(mut set: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if set == 0 {
            None
        } else {
            let i = set.trailing_zeros() as usize;
            set &= set - 1;
            Some(i)
        }
    })
}

impl Search {
    fn new(g: &CoverageGraph, opts: AuditOptions) -> Self {
        let n = g.n_cells();
        let nbr = (0..n)
            .map(|v| g.cell_neighbors(v).fold(0u128, |m, u| m | bit(u)))
            .collect();
        let mask = |links: &[NodeId]| links.iter().fold(0u128, |m, &c| m | bit(c));
        Self {
            nbr,
            base: mask(g.base_links()),
            term: mask(g.terminal_links()),
            opts,
            expanded: 0,
            path: Vec::with_capacity(n),
        }
    }

    fn dfs(&mut self, at: Option<usize>, unvisited: u128) -> Step {
        self.expanded += 1;
        if let Some(limit) = self.opts.budget {
            if self.expanded > limit {
                return Step::OutOfBudget;
            }
        }
        if unvisited == 0 {
            return match at {
                Some(v) if self.term & bit(v) != 0 => Step::Found,
                _ => Step::Exhausted,
            };
        }
        let candidates = match at {
            None => self.base,
            Some(v) => self.nbr[v],
        } & unvisited;
        if candidates == 0 || self.pruned(candidates, unvisited) {
            return Step::Exhausted;
        }

        let mut order: Vec<(u32, usize)> = bits(candidates)
            .map(|c| ((self.nbr[c] & unvisited).count_ones(), c))
            .collect();
        order.sort_unstable();
        for (_, c) in order {
            self.path.push(c);
            match self.dfs(Some(c), unvisited & !bit(c)) {
                Step::Exhausted => {
                    self.path.pop();
                }
                other => return other,
            }
        }
        Step::Exhausted
    }

    /// `true` when no Hamiltonian completion of `unvisited` can start in
    /// `candidates` and end on a terminal link.
    fn pruned(&self, candidates: u128, unvisited: u128) -> bool {
        let p = self.opts.pruning;
        if p.terminal_reach && unvisited & self.term == 0 {
            return true;
        }
        if p.degree && unvisited.count_ones() > 1 {
            let mut low = 0u32;
            let mut low_not_first = 0u32;
            let mut low_not_last = 0u32;
            for u in bits(unvisited) {
                let d = (self.nbr[u] & unvisited).count_ones();
                if d == 0 {
                    return true;
                }
                if d == 1 {
                    low += 1;
                    let first = candidates & bit(u) != 0;
                    let last = self.term & bit(u) != 0;
                    if !first && !last {
                        return true;
                    }
                    low_not_first += u32::from(!first);
                    low_not_last += u32::from(!last);
                }
            }
            if low > 2 || low_not_first > 1 || low_not_last > 1 {
                return true;
            }
        }
        if p.connectivity {
            let mut reach = candidates;
            let mut frontier = candidates;
            while frontier != 0 {
                let mut next = 0u128;
                for v in bits(frontier) {
                    next |= self.nbr[v];
                }
                next &= unvisited & !reach;
                reach |= next;
                frontier = next;
            }
            if reach != unvisited {
                return true;
            }
        }
        false
    }
}

/// Independent cross-check: considers every ordering of the cells, discarding
/// an ordering as soon as a prefix stops being a walk from `b`.
pub fn brute_force_enumerate(g: &CoverageGraph) -> Result<AuditResult, OracleError> {
    let n = g.n_cells();
    if n > MAX_BRUTE_FORCE_CELLS {
        return Err(OracleError::TooLarge {
            cells: n,
            limit: MAX_BRUTE_FORCE_CELLS,
        });
    }
    let start = Instant::now();
    let mut perm: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut expanded = 0u64;
    let found = permute(g, &mut perm, &mut used, &mut expanded);
    let witness = found.then(|| {
        let mut w = vec![g.base_node()];
        w.extend(perm.iter().copied());
        w.push(g.terminal_node());
        w
    });
    Ok(AuditResult {
        outcome: if found {
            Feasibility::Feasible
        } else {
            Feasibility::Infeasible
        },
        witness,
        nodes_expanded: expanded,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn permute(g: &CoverageGraph, perm: &mut Vec<usize>, used: &mut [bool], expanded: &mut u64) -> bool {
    *expanded += 1;
    let n = used.len();
    let prev = perm.last().copied().unwrap_or(g.base_node());
    if perm.len() == n {
        return g.adjacent(prev, g.terminal_node());
    }
    for c in 0..n {
        if used[c] || !g.adjacent(prev, c) {
            continue;
        }
        used[c] = true;
        perm.push(c);
        if permute(g, perm, used, expanded) {
            return true;
        }
        perm.pop();
        used[c] = false;
    }
    false
}
