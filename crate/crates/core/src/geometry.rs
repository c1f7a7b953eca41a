//! Planar geometry for the flat-top hexagonal lattice and the polygon
//! primitives used by AOI generation, tessellation and classification.
//!
//! Lattice cells are addressed in even-q offset coordinates: column pitch is
//! `1.5 h`, row pitch is `sqrt(3) h`, and odd columns sit half a row pitch
//! below even ones (in `+y` terms, `y = sqrt(3) h (row - (col & 1) / 2)`).
//! Cell `(0, 0)` is centred on the origin.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Absolute tolerance used for geometric predicates in unit-normalised frames.
pub const GEOM_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        debug_assert!(x.is_finite() && y.is_finite(), "non-finite point ({x}, {y})");
        Self { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn rotate(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

/// Even-q offset address of one lattice cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OffsetCoord {
    pub col: i32,
    pub row: i32,
}

impl OffsetCoord {
    pub const fn new(col: i32, row: i32) -> Self {
        Self { col, row }
    }

    /// Centre of the cell, panicking on a non-positive radius.
    pub fn center(self, h: f64) -> Point {
        offset_to_center(self, h).expect("circumradius must be positive")
    }

    pub fn neighbors(self) -> [OffsetCoord; 6] {
        face_neighbors(self)
    }
}

// Neighbour deltas, counterclockwise starting from the lower-right face.
const EVEN_COL_DELTAS: [(i32, i32); 6] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (0, -1)];
const ODD_COL_DELTAS: [(i32, i32); 6] = [(1, -1), (1, 0), (0, 1), (-1, 0), (-1, -1), (0, -1)];

pub fn offset_to_center(c: OffsetCoord, h: f64) -> Result<Point, GeometryError> {
    if !h.is_finite() || h <= 0.0 {
        return Err(GeometryError::InvalidParameter(format!(
            "circumradius must be positive and finite, got {h}"
        )));
    }
    let x = 1.5 * h * f64::from(c.col);
    let shift = if c.col & 1 == 0 { 0.0 } else { 0.5 };
    let y = SQRT_3 * h * (f64::from(c.row) - shift);
    Ok(Point::new(x, y))
}

pub fn face_neighbors(c: OffsetCoord) -> [OffsetCoord; 6] {
    let deltas = if c.col & 1 == 0 {
        &EVEN_COL_DELTAS
    } else {
        &ODD_COL_DELTAS
    };
    deltas.map(|(dc, dr)| OffsetCoord::new(c.col + dc, c.row + dr))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HexCell {
    pub coord: OffsetCoord,
    pub center: Point,
    pub circumradius: f64,
}

impl HexCell {
    pub fn new(coord: OffsetCoord, center: Point, circumradius: f64) -> Self {
        Self {
            coord,
            center,
            circumradius,
        }
    }

    pub fn vertices(&self) -> [Point; 6] {
        hex_vertices(self.center, self.circumradius)
    }

    pub fn area(&self) -> f64 {
        1.5 * SQRT_3 * self.circumradius * self.circumradius
    }
}

/// Flat-top hexagon vertices, counterclockwise, first vertex at angle 0.
pub fn hex_vertices(center: Point, h: f64) -> [Point; 6] {
    std::array::from_fn(|k| {
        let a = PI / 3.0 * k as f64;
        Point::new(center.x + h * a.cos(), center.y + h * a.sin())
    })
}

/// Rigid frame: a point `p` in the frame has world position `origin + rotate(p, angle)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub origin: Point,
    pub angle: f64,
}

impl Frame {
    pub const IDENTITY: Frame = Frame {
        origin: Point::ORIGIN,
        angle: 0.0,
    };

    pub fn to_world(&self, p: Point) -> Point {
        self.origin + p.rotate(self.angle)
    }

    pub fn to_local(&self, p: Point) -> Point {
        (p - self.origin).rotate(-self.angle)
    }
}

// ---------------------------------------------------------------------------
// Rings and polygons

pub fn signed_area(ring: &[Point]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += ring[i].cross(ring[(i + 1) % n]);
    }
    0.5 * acc
}

pub fn ring_perimeter(ring: &[Point]) -> f64 {
    let n = ring.len();
    (0..n).map(|i| ring[i].distance(ring[(i + 1) % n])).sum()
}

pub fn centroid(points: &[Point]) -> Point {
    let n = points.len().max(1) as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Point::new(sx / n, sy / n)
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Proper or touching intersection of closed segments `ab` and `cd`.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > GEOM_EPS && d2 < -GEOM_EPS) || (d1 < -GEOM_EPS && d2 > GEOM_EPS))
        && ((d3 > GEOM_EPS && d4 < -GEOM_EPS) || (d3 < -GEOM_EPS && d4 > GEOM_EPS))
    {
        return true;
    }
    let on = |p: Point, q: Point, r: Point, o: f64| {
        o.abs() <= GEOM_EPS
            && r.x >= p.x.min(q.x) - GEOM_EPS
            && r.x <= p.x.max(q.x) + GEOM_EPS
            && r.y >= p.y.min(q.y) - GEOM_EPS
            && r.y <= p.y.max(q.y) + GEOM_EPS
    };
    on(c, d, a, d1) || on(c, d, b, d2) || on(a, b, c, d3) || on(a, b, d, d4)
}

/// Strict crossing: the open segments intersect in a single interior point.
pub fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    ((d1 > GEOM_EPS && d2 < -GEOM_EPS) || (d1 < -GEOM_EPS && d2 > GEOM_EPS))
        && ((d3 > GEOM_EPS && d4 < -GEOM_EPS) || (d3 < -GEOM_EPS && d4 > GEOM_EPS))
}

/// Number of ring edges strictly crossed by segment `ab`.
pub fn ring_crossings(ring: &[Point], a: Point, b: Point) -> usize {
    let n = ring.len();
    (0..n)
        .filter(|&i| segments_cross(a, b, ring[i], ring[(i + 1) % n]))
        .count()
}

/// Even-odd point-in-ring test. Points on the boundary may go either way.
pub fn point_in_ring(ring: &[Point], p: Point) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (ring[i], ring[j]);
        if (pi.y > p.y) != (pj.y > p.y) {
            let x = pj.x + (p.y - pj.y) * (pi.x - pj.x) / (pi.y - pj.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// `true` when no two non-adjacent edges of the ring touch.
pub fn ring_is_simple(ring: &[Point]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        if a.distance(b) <= GEOM_EPS {
            return false;
        }
        for j in (i + 1)..n {
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            if segments_intersect(a, b, ring[j], ring[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

fn rings_touch(a: &[Point], b: &[Point]) -> bool {
    let (na, nb) = (a.len(), b.len());
    (0..na).any(|i| {
        (0..nb).any(|j| segments_intersect(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb]))
    })
}

/// Sutherland–Hodgman clip of an arbitrary ring against a convex CCW ring.
/// The output may contain degenerate bridge edges for concave subjects, but
/// its signed area equals the area of the intersection.
pub fn clip_to_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut output: Vec<Point> = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if output.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % m]);
        let input = std::mem::take(&mut output);
        let inside = |p: Point| orient(a, b, p) >= 0.0;
        let intersect = |p: Point, q: Point| {
            let dp = orient(a, b, p);
            let dq = orient(a, b, q);
            let t = dp / (dp - dq);
            p + (q - p) * t
        };
        let k = input.len();
        for j in 0..k {
            let cur = input[j];
            let prev = input[(j + k - 1) % k];
            match (inside(cur), inside(prev)) {
                (true, true) => output.push(cur),
                (true, false) => {
                    output.push(intersect(prev, cur));
                    output.push(cur);
                }
                (false, true) => output.push(intersect(prev, cur)),
                (false, false) => {}
            }
        }
    }
    output
}

/// Area of the intersection of an arbitrary simple ring with a convex ring.
pub fn overlap_area(subject: &[Point], convex: &[Point]) -> f64 {
    signed_area(&clip_to_convex(subject, convex)).abs()
}

/// Andrew's monotone chain. Returns the hull counterclockwise without
/// collinear points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.distance(*b) <= GEOM_EPS);
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= GEOM_EPS
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Oriented rectangle. `angle` is the direction of the side used as the
/// caliper edge; `width` runs along it and `height` across it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotatedRect {
    pub angle: f64,
    pub width: f64,
    pub height: f64,
    /// Corner with minimum coordinates in the rectangle's own frame.
    pub min_corner: Point,
}

impl RotatedRect {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn long_side(&self) -> f64 {
        self.width.max(self.height)
    }

    pub fn short_side(&self) -> f64 {
        self.width.min(self.height)
    }

    /// Frame whose x axis runs along the rectangle's caliper edge and whose
    /// origin is the rectangle's minimum corner.
    pub fn frame(&self) -> Frame {
        Frame {
            origin: self.min_corner,
            angle: self.angle,
        }
    }

    pub fn corners(&self) -> [Point; 4] {
        let f = self.frame();
        [
            f.to_world(Point::new(0.0, 0.0)),
            f.to_world(Point::new(self.width, 0.0)),
            f.to_world(Point::new(self.width, self.height)),
            f.to_world(Point::new(0.0, self.height)),
        ]
    }
}

/// Minimum-area enclosing rectangle by rotating calipers over the convex hull.
/// Ties between equal-area orientations keep the first hull edge.
pub fn min_rotated_rect(points: &[Point]) -> Result<RotatedRect, GeometryError> {
    let hull = convex_hull(points);
    let n = hull.len();
    if n < 3 {
        return Err(GeometryError::InvalidGeometry(
            "fewer than three non-collinear points".into(),
        ));
    }
    let edge_dir = |i: usize| {
        let d = hull[(i + 1) % n] - hull[i];
        d * (1.0 / d.norm())
    };

    let u0 = edge_dir(0);
    let n0 = Point::new(-u0.y, u0.x);
    let extreme = |f: &dyn Fn(Point) -> f64| {
        (0..n)
            .max_by(|&a, &b| f(hull[a]).total_cmp(&f(hull[b])))
            .unwrap_or(0)
    };
    let mut right = extreme(&|p| p.dot(u0));
    let mut top = extreme(&|p| p.dot(n0));
    let mut left = extreme(&|p| -p.dot(u0));

    let mut best: Option<RotatedRect> = None;
    for i in 0..n {
        let u = edge_dir(i);
        let nrm = Point::new(-u.y, u.x);
        let base = hull[i];
        // Projections along a strictly convex ring are unimodal, so each
        // caliper only ever moves forward.
        let along = |k: usize| (hull[k] - base).dot(u);
        let across = |k: usize| (hull[k] - base).dot(nrm);
        for _ in 0..n {
            if along((right + 1) % n) > along(right) {
                right = (right + 1) % n;
            } else {
                break;
            }
        }
        for _ in 0..n {
            if across((top + 1) % n) > across(top) {
                top = (top + 1) % n;
            } else {
                break;
            }
        }
        for _ in 0..n {
            if along((left + 1) % n) < along(left) {
                left = (left + 1) % n;
            } else {
                break;
            }
        }

        let max_u = (hull[right] - base).dot(u);
        let min_u = (hull[left] - base).dot(u);
        let height = (hull[top] - base).dot(nrm);
        let width = max_u - min_u;
        let rect = RotatedRect {
            angle: u.y.atan2(u.x),
            width,
            height,
            min_corner: base + u * min_u,
        };
        let better = match &best {
            None => true,
            Some(b) => rect.area() < b.area() * (1.0 - 1e-12),
        };
        if better {
            best = Some(rect);
        }
    }
    best.ok_or_else(|| GeometryError::InvalidGeometry("empty hull".into()))
}

/// Outer ring counterclockwise, holes clockwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonWithHoles {
    pub outer: Vec<Point>,
    pub holes: Vec<Vec<Point>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolygonMetrics {
    pub area: f64,
    pub perimeter: f64,
    pub aspect_ratio: f64,
}

impl PolygonWithHoles {
    /// Builds a polygon, normalising ring orientation and checking simplicity,
    /// containment and hole disjointness.
    pub fn new(outer: Vec<Point>, holes: Vec<Vec<Point>>) -> Result<Self, GeometryError> {
        let mut poly = Self { outer, holes };
        poly.normalize_orientation();
        poly.validate()?;
        Ok(poly)
    }

    pub fn simple(outer: Vec<Point>) -> Result<Self, GeometryError> {
        Self::new(outer, Vec::new())
    }

    fn normalize_orientation(&mut self) {
        if signed_area(&self.outer) < 0.0 {
            self.outer.reverse();
        }
        for hole in &mut self.holes {
            if signed_area(hole) > 0.0 {
                hole.reverse();
            }
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.outer.iter().chain(self.holes.iter().flatten()).any(|p| !p.is_finite()) {
            return Err(GeometryError::InvalidGeometry("non-finite vertex".into()));
        }
        if signed_area(&self.outer) <= GEOM_EPS {
            return Err(GeometryError::InvalidGeometry("outer ring has no area".into()));
        }
        if !ring_is_simple(&self.outer) {
            return Err(GeometryError::InvalidGeometry("outer ring is not simple".into()));
        }
        for (k, hole) in self.holes.iter().enumerate() {
            if signed_area(hole) >= -GEOM_EPS || !ring_is_simple(hole) {
                return Err(GeometryError::InvalidGeometry(format!("hole {k} is degenerate")));
            }
            if !self.hole_fits(hole, k) {
                return Err(GeometryError::InvalidGeometry(format!(
                    "hole {k} is not strictly inside the outer ring or overlaps another hole"
                )));
            }
        }
        Ok(())
    }

    /// Would `hole` be admissible next to holes `0..limit`?
    fn hole_fits(&self, hole: &[Point], limit: usize) -> bool {
        if rings_touch(hole, &self.outer) || !hole.iter().all(|&p| point_in_ring(&self.outer, p)) {
            return false;
        }
        self.holes[..limit].iter().all(|other| {
            !rings_touch(hole, other)
                && !point_in_ring(other, hole[0])
                && !point_in_ring(hole, other[0])
        })
    }

    /// Appends a hole if it keeps the polygon valid; returns whether it was added.
    pub fn try_add_hole(&mut self, mut hole: Vec<Point>) -> bool {
        if signed_area(&hole) > 0.0 {
            hole.reverse();
        }
        if signed_area(&hole) >= -GEOM_EPS || !ring_is_simple(&hole) {
            return false;
        }
        if !self.hole_fits(&hole, self.holes.len()) {
            return false;
        }
        self.holes.push(hole);
        true
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.outer) + self.holes.iter().map(|h| signed_area(h)).sum::<f64>()
    }

    /// Is `p` in free space (inside the outer ring and outside every hole)?
    pub fn contains(&self, p: Point) -> bool {
        point_in_ring(&self.outer, p) && !self.holes.iter().any(|h| point_in_ring(h, p))
    }

    /// Area of the intersection of free space with a convex CCW ring.
    pub fn free_overlap(&self, convex: &[Point]) -> f64 {
        let outer = overlap_area(&self.outer, convex);
        let holes: f64 = self.holes.iter().map(|h| overlap_area(h, convex)).sum();
        (outer - holes).max(0.0)
    }

    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Self {
        Self {
            outer: self.outer.iter().map(|&p| f(p)).collect(),
            holes: self
                .holes
                .iter()
                .map(|h| h.iter().map(|&p| f(p)).collect())
                .collect(),
        }
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        bounding_box(&self.outer)
    }
}

pub fn bounding_box(points: &[Point]) -> (Point, Point) {
    let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in points {
        lo = (lo.0.min(p.x), lo.1.min(p.y));
        hi = (hi.0.max(p.x), hi.1.max(p.y));
    }
    (Point { x: lo.0, y: lo.1 }, Point { x: hi.0, y: hi.1 })
}

/// Area (outer minus holes), outer-ring perimeter, and the long/short side
/// ratio of the outer ring's minimum rotated rectangle.
pub fn polygon_metrics(p: &PolygonWithHoles) -> Result<PolygonMetrics, GeometryError> {
    let area = p.area();
    if area.is_nan() || area <= GEOM_EPS {
        return Err(GeometryError::InvalidGeometry("polygon has no area".into()));
    }
    let perimeter = ring_perimeter(&p.outer);
    let rect = min_rotated_rect(&p.outer)?;
    if rect.short_side() <= GEOM_EPS {
        return Err(GeometryError::InvalidGeometry("degenerate bounding rectangle".into()));
    }
    Ok(PolygonMetrics {
        area,
        perimeter,
        aspect_ratio: rect.long_side() / rect.short_side(),
    })
}
