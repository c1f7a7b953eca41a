//! Z-order traversal of cell centroids.

use crate::graph::{CoverageGraph, NodeId};

use super::{walk_from_order, PlanResult};

/// Bits per axis used by the planner.
pub const MORTON_BITS: u32 = 16;

/// Maps `v` in `[lo, hi]` to an integer in `[0, 2^bits - 1]`.
pub fn quantize(v: f64, lo: f64, hi: f64, bits: u32) -> u64 {
    let max = ((1u64 << bits) - 1) as f64;
    if hi <= lo {
        return 0;
    }
    (((v - lo) / (hi - lo)).clamp(0.0, 1.0) * max).round() as u64
}

/// Interleaves the low 32 bits of `x` (even positions) and `y` (odd).
pub fn morton_code(x: u64, y: u64) -> u64 {
    fn spread(mut v: u64) -> u64 {
        v &= 0xffff_ffff;
        v = (v | (v << 16)) & 0x0000_ffff_0000_ffff;
        v = (v | (v << 8)) & 0x00ff_00ff_00ff_00ff;
        v = (v | (v << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
        v = (v | (v << 2)) & 0x3333_3333_3333_3333;
        v = (v | (v << 1)) & 0x5555_5555_5555_5555;
        v
    }
    spread(x) | (spread(y) << 1)
}

/// Cells sorted by Morton code of their lattice-frame centroid quantized
/// over the cells' bounding box; ties by index.
pub fn morton_order(g: &CoverageGraph, bits: u32) -> Vec<NodeId> {
    let pts: Vec<_> = (0..g.n_cells()).map(|v| g.lattice_position(v)).collect();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let mut keyed: Vec<(u64, NodeId)> = pts
        .iter()
        .enumerate()
        .map(|(v, p)| (morton_code(quantize(p.x, x0, x1, bits), quantize(p.y, y0, y1, bits)), v))
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, v)| v).collect()
}

pub fn plan_morton(g: &CoverageGraph) -> PlanResult {
    walk_from_order(g, &morton_order(g, MORTON_BITS))
}
