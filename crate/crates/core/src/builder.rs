//! From AOI polygon to audited instance: tessellation in the oriented
//! bounding-box frame, mask post-processing, base attachment and the
//! feasibility gate.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aoi::{insert_obstacles, sample_aoi, stream_rng, AoiShape, Morphology, ObstacleConfig, Stream};
use crate::geometry::{
    hex_vertices, min_rotated_rect, ring_crossings, segments_intersect, Frame, OffsetCoord, Point,
    PolygonWithHoles, SQRT_3,
};
use crate::graph::CoverageGraph;
use crate::oracle::{hamiltonian_audit, Feasibility};

pub type Mask = BTreeSet<OffsetCoord>;

/// Why an attempted instance was not admitted.
#[derive(Debug, Error, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rejection {
    #[error("tessellation retained no cells")]
    EmptyTessellation,
    #[error("degenerate instance: {reason}")]
    Degenerate { reason: String },
    #[error("{cells} cells is outside the size band")]
    SizeBand { cells: usize },
    #[error("no outer-ring cell has line of sight to the launch point")]
    BaseAttachment,
    #[error("no Hamiltonian b-b' path exists")]
    Infeasible,
    #[error("audit budget exhausted")]
    Inconclusive,
}

impl Rejection {
    pub fn kind(&self) -> &'static str {
        match self {
            Rejection::EmptyTessellation => "empty_tessellation",
            Rejection::Degenerate { .. } => "degenerate",
            Rejection::SizeBand { .. } => "size_band",
            Rejection::BaseAttachment => "base_attachment",
            Rejection::Infeasible => "infeasible",
            Rejection::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyWeights {
    pub compact: f64,
    pub elongated: f64,
    pub irregular: f64,
}

impl FamilyWeights {
    /// Maps `u` in `[0, 1)` to a family by cumulative weight.
    pub fn pick(&self, u: f64) -> Morphology {
        let total = self.compact + self.elongated + self.irregular;
        let u = u * total;
        if u < self.compact {
            Morphology::Compact
        } else if u < self.compact + self.elongated {
            Morphology::Elongated
        } else {
            Morphology::Irregular
        }
    }
}

/// Generation parameters. Lengths other than `hex_radius` and `scale` are in
/// units of the hex circumradius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildConfig {
    pub hex_radius: f64,
    /// Nominal AOI radius before area jitter.
    pub scale: f64,
    pub min_cells: usize,
    pub max_cells: usize,
    /// Minimum free-space fraction of a hexagon for the cell to be kept.
    pub retention: f64,
    /// Launch point distance beyond the AOI bounding box.
    pub standoff: f64,
    pub max_holes: u32,
    pub hole_radius_min: f64,
    pub hole_radius_max: f64,
    pub family_weights: FamilyWeights,
    /// Node-expansion budget for the feasibility audit.
    pub audit_budget: Option<u64>,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            hex_radius: 1.0,
            scale: 5.6,
            min_cells: 28,
            max_cells: 46,
            retention: 0.5,
            standoff: 2.0,
            max_holes: 3,
            hole_radius_min: 0.8,
            hole_radius_max: 1.6,
            family_weights: FamilyWeights {
                compact: 0.55,
                elongated: 0.04,
                irregular: 0.41,
            },
            audit_budget: Some(2_000_000),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid build config: {0}")]
pub struct ConfigError(pub String);

impl BuildConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.hex_radius) || !positive(self.scale) {
            return Err(ConfigError("hex_radius and scale must be positive".into()));
        }
        if self.min_cells == 0 || self.min_cells > self.max_cells || self.max_cells > crate::oracle::MAX_AUDIT_CELLS {
            return Err(ConfigError(format!(
                "size band [{}, {}] must be non-empty and within 1..={}",
                self.min_cells,
                self.max_cells,
                crate::oracle::MAX_AUDIT_CELLS
            )));
        }
        if !(self.retention > 0.0 && self.retention <= 1.0) {
            return Err(ConfigError("retention must be in (0, 1]".into()));
        }
        if !positive(self.standoff) {
            return Err(ConfigError("standoff must be positive".into()));
        }
        if !(self.hole_radius_min > 0.0 && self.hole_radius_min <= self.hole_radius_max && self.hole_radius_max.is_finite()) {
            return Err(ConfigError("hole radius range is invalid".into()));
        }
        let w = &self.family_weights;
        if [w.compact, w.elongated, w.irregular].iter().any(|x| !(*x >= 0.0 && x.is_finite()))
            || w.compact + w.elongated + w.irregular <= 0.0
        {
            return Err(ConfigError("family weights must be non-negative with a positive sum".into()));
        }
        Ok(())
    }

    pub fn obstacles(&self) -> ObstacleConfig {
        ObstacleConfig {
            max_holes: self.max_holes,
            min_radius: self.hole_radius_min * self.hex_radius,
            max_radius: self.hole_radius_max * self.hex_radius,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub id: String,
    pub seed: u64,
    pub aoi: AoiShape,
    pub graph: CoverageGraph,
    pub hex_radius: f64,
    pub audited_feasible: bool,
}

pub fn instance_id(seed: u64) -> String {
    format!("hex-{seed:016x}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tessellation {
    /// Lattice frame: x along the long side of the outer ring's minimum
    /// rotated rectangle, origin at its minimum corner.
    pub frame: Frame,
    /// The AOI expressed in the lattice frame.
    pub local: PolygonWithHoles,
    pub mask: Mask,
}

/// Frame of the minimum rotated rectangle with x along the long side.
pub fn lattice_frame(outer: &[Point]) -> Result<Frame, Rejection> {
    let rect = min_rotated_rect(outer).map_err(|e| Rejection::Degenerate {
        reason: e.to_string(),
    })?;
    let f = rect.frame();
    if rect.width >= rect.height {
        Ok(f)
    } else {
        Ok(Frame {
            origin: f.to_world(Point::new(rect.width, 0.0)),
            angle: f.angle + FRAC_PI_2,
        })
    }
}

pub fn tessellate(aoi: &AoiShape, h: f64, retention: f64) -> Result<Tessellation, Rejection> {
    let frame = lattice_frame(&aoi.polygon.outer)?;
    let local = aoi.polygon.map_points(|p| frame.to_local(p));
    let mask = retain_cells(&local, h, retention);
    if mask.is_empty() {
        return Err(Rejection::EmptyTessellation);
    }
    Ok(Tessellation { frame, local, mask })
}

/// Lattice cells (in the polygon's own frame) whose free-space overlap is
/// at least `retention` of the hexagon area.
pub fn retain_cells(local: &PolygonWithHoles, h: f64, retention: f64) -> Mask {
    let (lo, hi) = local.bounding_box();
    let hex_area = 1.5 * SQRT_3 * h * h;
    let col_lo = (lo.x / (1.5 * h)).floor() as i32 - 1;
    let col_hi = (hi.x / (1.5 * h)).ceil() as i32 + 1;
    let row_lo = (lo.y / (SQRT_3 * h)).floor() as i32 - 1;
    let row_hi = (hi.y / (SQRT_3 * h)).ceil() as i32 + 2;
    let mut mask = Mask::new();
    for col in col_lo..=col_hi {
        for row in row_lo..=row_hi {
            let c = OffsetCoord::new(col, row);
            let center = c.center(h);
            if center.x < lo.x - h || center.x > hi.x + h || center.y < lo.y - h || center.y > hi.y + h {
                continue;
            }
            let overlap = local.free_overlap(&hex_vertices(center, h));
            if overlap >= retention * hex_area * (1.0 - 1e-12) {
                mask.insert(c);
            }
        }
    }
    mask
}

fn mask_neighbors<'a>(mask: &'a Mask, c: OffsetCoord) -> impl Iterator<Item = OffsetCoord> + 'a {
    c.neighbors().into_iter().filter(move |n| mask.contains(n))
}

/// Connected components, largest first; ties go to the component holding
/// the smallest coordinate.
fn components(mask: &Mask) -> Vec<Mask> {
    let mut seen = Mask::new();
    let mut out = Vec::new();
    for &start in mask {
        if seen.contains(&start) {
            continue;
        }
        let mut comp = Mask::new();
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(c) = queue.pop_front() {
            comp.insert(c);
            for n in mask_neighbors(mask, c) {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        out.push(comp);
    }
    out.sort_by_key(|c| std::cmp::Reverse(c.len()));
    out
}

/// Empty lattice cells reachable from outside the mask's bounding box.
fn exterior(mask: &Mask) -> Mask {
    let (mut c0, mut c1, mut r0, mut r1) = (i32::MAX, i32::MIN, i32::MAX, i32::MIN);
    for c in mask {
        c0 = c0.min(c.col);
        c1 = c1.max(c.col);
        r0 = r0.min(c.row);
        r1 = r1.max(c.row);
    }
    let (c0, c1, r0, r1) = (c0 - 1, c1 + 1, r0 - 1, r1 + 1);
    let inside = |c: &OffsetCoord| c.col >= c0 && c.col <= c1 && c.row >= r0 && c.row <= r1;
    let mut ext = Mask::new();
    let mut queue = VecDeque::new();
    for col in c0..=c1 {
        for row in [r0, r1] {
            queue.push_back(OffsetCoord::new(col, row));
        }
    }
    for row in r0..=r1 {
        for col in [c0, c1] {
            queue.push_back(OffsetCoord::new(col, row));
        }
    }
    while let Some(c) = queue.pop_front() {
        if !inside(&c) || mask.contains(&c) || !ext.insert(c) {
            continue;
        }
        queue.extend(c.neighbors());
    }
    ext
}

/// Cells of the mask touching the exterior.
pub fn outer_ring(mask: &Mask) -> Mask {
    let ext = exterior(mask);
    mask.iter()
        .copied()
        .filter(|c| c.neighbors().iter().any(|n| ext.contains(n)))
        .collect()
}

/// Keeps the largest component and strips degree-1 dead ends until nothing
/// changes, then checks that the exterior boundary forms a single ring.
pub fn postprocess_mask(mask: &Mask) -> Result<Mask, Rejection> {
    if mask.is_empty() {
        return Err(Rejection::EmptyTessellation);
    }
    let mut cur = mask.clone();
    loop {
        let before = cur.len();
        cur = components(&cur).into_iter().next().unwrap_or_default();
        loop {
            let stubs: Vec<OffsetCoord> = cur
                .iter()
                .copied()
                .filter(|&c| mask_neighbors(&cur, c).count() == 1)
                .collect();
            if stubs.is_empty() {
                break;
            }
            for s in stubs {
                cur.remove(&s);
            }
        }
        if cur.is_empty() {
            return Err(Rejection::Degenerate {
                reason: "post-processing removed every cell".into(),
            });
        }
        if cur.len() == before {
            break;
        }
    }
    let ring = outer_ring(&cur);
    if components(&ring).len() > 1 {
        return Err(Rejection::Degenerate {
            reason: "exterior boundary forms more than one ring".into(),
        });
    }
    // Every cell must be reachable from the exterior border.
    debug_assert_eq!(components(&cur).len(), 1);
    Ok(cur)
}

/// Launch position in the lattice frame: `standoff` beyond a seed-chosen
/// side of the AOI bounding box, somewhere in the central half of that side.
pub fn launch_point(local: &PolygonWithHoles, h: f64, standoff: f64, seed: u64) -> Point {
    let mut rng = stream_rng(seed, Stream::Base);
    let side = rng.random_range(0..4u8);
    let along = rng.random_range(0.25..0.75);
    let (lo, hi) = local.bounding_box();
    let d = standoff * h;
    let x = lo.x + along * (hi.x - lo.x);
    let y = lo.y + along * (hi.y - lo.y);
    match side {
        0 => Point::new(x, lo.y - d),
        1 => Point::new(hi.x + d, y),
        2 => Point::new(x, hi.y + d),
        _ => Point::new(lo.x - d, y),
    }
}

/// Outer-ring cells with line of sight to `launch` (lattice frame): the
/// segment to the cell centre enters the outer ring at most once and meets
/// no hole.
pub fn visible_ring_cells(mask: &Mask, local: &PolygonWithHoles, h: f64, launch: Point) -> Mask {
    outer_ring(mask)
        .into_iter()
        .filter(|&c| {
            let target = c.center(h);
            if ring_crossings(&local.outer, launch, target) > 1 {
                return false;
            }
            !local.holes.iter().any(|hole| {
                let m = hole.len();
                (0..m).any(|i| segments_intersect(launch, target, hole[i], hole[(i + 1) % m]))
            })
        })
        .collect()
}

/// Places the shared `b`/`b'` launch point and links both to the visible
/// outer-ring cells.
pub fn attach_base(
    mask: &Mask,
    tess: &Tessellation,
    h: f64,
    standoff: f64,
    seed: u64,
) -> Result<CoverageGraph, Rejection> {
    let launch = launch_point(&tess.local, h, standoff, seed);
    attach_base_at(mask, tess, h, launch)
}

pub fn attach_base_at(mask: &Mask, tess: &Tessellation, h: f64, launch: Point) -> Result<CoverageGraph, Rejection> {
    let links = visible_ring_cells(mask, &tess.local, h, launch);
    if links.is_empty() {
        return Err(Rejection::BaseAttachment);
    }
    let world = tess.frame.to_world(launch);
    CoverageGraph::from_lattice(mask, h, tess.frame, world, world, &links, &links).map_err(|e| {
        Rejection::Degenerate {
            reason: e.to_string(),
        }
    })
}

/// The whole pipeline for one seed.
pub fn build_instance(family: Morphology, seed: u64, cfg: &BuildConfig) -> Result<Instance, Rejection> {
    let h = cfg.hex_radius;
    let shape = sample_aoi(family, seed, cfg.scale);
    let shape = insert_obstacles(&shape, seed, &cfg.obstacles());
    let tess = tessellate(&shape, h, cfg.retention)?;
    let mask = postprocess_mask(&tess.mask)?;
    if mask.len() < cfg.min_cells || mask.len() > cfg.max_cells {
        return Err(Rejection::SizeBand { cells: mask.len() });
    }
    let graph = attach_base(&mask, &tess, h, cfg.standoff, seed)?;
    match hamiltonian_audit(&graph, cfg.audit_budget).outcome {
        Feasibility::Feasible => Ok(Instance {
            id: instance_id(seed),
            seed,
            aoi: shape,
            graph,
            hex_radius: h,
            audited_feasible: true,
        }),
        Feasibility::Infeasible => Err(Rejection::Infeasible),
        Feasibility::Inconclusive => Err(Rejection::Inconclusive),
    }
}

/// Rejection counts keyed by [`Rejection::kind`].
pub type RejectionTally = BTreeMap<String, usize>;
