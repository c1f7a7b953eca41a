//! Synthetic AOI polygons in three morphology families, obstacle holes, and
//! post hoc morphology classification by compactness and aspect ratio.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{polygon_metrics, GeometryError, Point, PolygonWithHoles};

/// Compactness above which a non-elongated outline counts as compact.
pub const COMPACT_THRESHOLD: f64 = 0.6;
/// Aspect ratio at or above which an outline counts as elongated.
pub const ELONGATED_ASPECT: f64 = 2.0;

const RING_VERTICES: usize = 72;
const HOLE_RETRIES: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Morphology {
    Compact,
    Elongated,
    Irregular,
}

impl Morphology {
    pub const ALL: [Morphology; 3] = [Morphology::Compact, Morphology::Elongated, Morphology::Irregular];

    pub fn name(self) -> &'static str {
        match self {
            Morphology::Compact => "compact",
            Morphology::Elongated => "elongated",
            Morphology::Irregular => "irregular",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Morphology::Compact => "Compact",
            Morphology::Elongated => "Elongated",
            Morphology::Irregular => "Irregular",
        }
    }
}

impl fmt::Display for Morphology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Morphology {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Morphology::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown morphology `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorphologyClass {
    pub label: Morphology,
    pub compactness: f64,
    pub aspect: f64,
}

impl MorphologyClass {
    /// Label as a pure function of compactness and aspect ratio.
    pub fn from_measures(compactness: f64, aspect: f64) -> Self {
        let label = if aspect >= ELONGATED_ASPECT {
            Morphology::Elongated
        } else if compactness > COMPACT_THRESHOLD {
            Morphology::Compact
        } else {
            Morphology::Irregular
        };
        Self {
            label,
            compactness,
            aspect,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AoiShape {
    pub polygon: PolygonWithHoles,
    pub morphology: MorphologyClass,
    pub seed: u64,
    pub family_hint: Morphology,
}

/// Polsby–Popper compactness over the outer outline plus the minimum
/// rotated rectangle's aspect ratio.
pub fn classify_morphology(p: &PolygonWithHoles) -> Result<MorphologyClass, GeometryError> {
    let m = polygon_metrics(p)?;
    let c = 4.0 * PI * m.area / (m.perimeter * m.perimeter);
    Ok(MorphologyClass::from_measures(c, m.aspect_ratio))
}

/// Independent random sub-streams derived from one instance seed.
#[derive(Clone, Copy, Debug)]
#[repr(u64)]
pub enum Stream {
    Polygon = 1,
    Holes = 2,
    Base = 3,
    /// Family draw for a generation attempt.
    Family = 4,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Samples an outer ring for `family`. `scale` is the nominal radius: the
/// ring is rescaled to an area of `pi * scale^2` times a jitter in [0.8, 1.25].
pub fn sample_aoi(family: Morphology, seed: u64, scale: f64) -> AoiShape {
    assert!(scale > 0.0, "scale must be positive");
    let mut rng = stream_rng(seed, Stream::Polygon);
    let raw = match family {
        Morphology::Compact => compact_ring(&mut rng),
        Morphology::Elongated => elongated_ring(&mut rng),
        Morphology::Irregular => irregular_ring(&mut rng),
    };
    let target_area = PI * scale * scale * rng.random_range(0.8..1.25);
    let rotation = rng.random_range(0.0..2.0 * PI);
    let ring = normalize_ring(raw, target_area, rotation);
    let polygon = match PolygonWithHoles::simple(ring) {
        Ok(p) => p,
        // Radial rings with positive radii are star-shaped and always simple;
        // fall back to a disc if rounding ever says otherwise.
        Err(_) => PolygonWithHoles::simple(normalize_ring(circle(RING_VERTICES), target_area, 0.0))
            .expect("disc is a valid polygon"),
    };
    let morphology = classify_morphology(&polygon).expect("sampled polygon has area");
    AoiShape {
        polygon,
        morphology,
        seed,
        family_hint: family,
    }
}

fn circle(n: usize) -> Vec<Point> {
    (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            Point::new(a.cos(), a.sin())
        })
        .collect()
}

fn normalize_ring(ring: Vec<Point>, target_area: f64, rotation: f64) -> Vec<Point> {
    let area = crate::geometry::signed_area(&ring).abs();
    let k = (target_area / area).sqrt();
    let c = crate::geometry::centroid(&ring);
    ring.into_iter().map(|p| ((p - c) * k).rotate(rotation)).collect()
}

/// Low-frequency Fourier radius perturbation.
fn harmonic_radius(rng: &mut ChaCha8Rng, orders: std::ops::RangeInclusive<u32>, amp: f64) -> impl Fn(f64) -> f64 {
    let terms: Vec<(f64, f64, f64)> = orders
        .map(|k| (f64::from(k), rng.random_range(0.0..amp), rng.random_range(0.0..2.0 * PI)))
        .collect();
    move |theta| 1.0 + terms.iter().map(|(k, a, ph)| a * (k * theta + ph).cos()).sum::<f64>()
}

fn compact_ring(rng: &mut ChaCha8Rng) -> Vec<Point> {
    let stretch = rng.random_range(1.0..1.6);
    let radius = harmonic_radius(rng, 2..=4, 0.07);
    (0..RING_VERTICES)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / RING_VERTICES as f64;
            let r = radius(t);
            Point::new(stretch * r * t.cos(), r * t.sin())
        })
        .collect()
}

fn elongated_ring(rng: &mut ChaCha8Rng) -> Vec<Point> {
    // Rounded rectangle (superellipse) of aspect 2..4 with wobbly sides.
    let aspect = rng.random_range(2.2..4.0);
    let exponent = rng.random_range(3.0..6.0);
    let radius = harmonic_radius(rng, 3..=6, 0.04);
    let bend = rng.random_range(-0.06..0.06);
    (0..RING_VERTICES)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / RING_VERTICES as f64;
            let (s, c) = t.sin_cos();
            let e = 2.0 / exponent;
            let x = aspect * c.signum() * c.abs().powf(e);
            let y = s.signum() * s.abs().powf(e);
            let r = radius(t);
            Point::new(x * r, y * r + bend * x * x)
        })
        .collect()
}

fn irregular_ring(rng: &mut ChaCha8Rng) -> Vec<Point> {
    // Star outline: a few deep angular notches on top of harmonic noise.
    let stretch = rng.random_range(1.0..1.4);
    let radius = harmonic_radius(rng, 2..=6, 0.12);
    let lobes = rng.random_range(3..=5);
    let offset = rng.random_range(0.0..2.0 * PI);
    let notches: Vec<(f64, f64, f64)> = (0..lobes)
        .map(|i| {
            let spacing = 2.0 * PI / f64::from(lobes);
            (
                offset + spacing * f64::from(i) + rng.random_range(-0.25..0.25) * spacing,
                rng.random_range(0.35..0.5),
                rng.random_range(0.12..0.25),
            )
        })
        .collect();
    (0..RING_VERTICES)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / RING_VERTICES as f64;
            let mut r = radius(t);
            for &(center, depth, width) in &notches {
                let d = angle_diff(t, center);
                r -= depth * (-(d / width).powi(2)).exp();
            }
            let r = r.max(0.2);
            Point::new(stretch * r * t.cos(), r * t.sin())
        })
        .collect()
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleConfig {
    pub max_holes: u32,
    pub min_radius: f64,
    pub max_radius: f64,
}

/// Adds between zero and `max_holes` blob-shaped holes strictly inside the
/// outer ring. Holes that collide are re-drawn a bounded number of times and
/// then skipped.
pub fn insert_obstacles(shape: &AoiShape, seed: u64, cfg: &ObstacleConfig) -> AoiShape {
    let mut rng = stream_rng(seed, Stream::Holes);
    let count = rng.random_range(0..=cfg.max_holes);
    let mut polygon = shape.polygon.clone();
    let (lo, hi) = polygon.bounding_box();
    for _ in 0..count {
        for _ in 0..HOLE_RETRIES {
            let center = Point::new(rng.random_range(lo.x..=hi.x), rng.random_range(lo.y..=hi.y));
            let radius = if cfg.max_radius > cfg.min_radius {
                rng.random_range(cfg.min_radius..cfg.max_radius)
            } else {
                cfg.min_radius
            };
            let hole = blob(&mut rng, center, radius);
            if polygon.contains(center) && polygon.try_add_hole(hole) {
                break;
            }
        }
    }
    if polygon.holes.len() == shape.polygon.holes.len() {
        return AoiShape {
            polygon,
            ..shape.clone()
        };
    }
    let morphology = classify_morphology(&polygon).unwrap_or(shape.morphology);
    AoiShape {
        polygon,
        morphology,
        ..shape.clone()
    }
}

fn blob(rng: &mut ChaCha8Rng, center: Point, radius: f64) -> Vec<Point> {
    let n = 10;
    let elong = rng.random_range(1.0..1.8);
    let tilt = rng.random_range(0.0..PI);
    let radial: Vec<f64> = (0..n).map(|_| rng.random_range(0.75..1.0)).collect();
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            let r = radius * radial[k];
            let p = Point::new(elong * r * t.cos(), r * t.sin() / elong.sqrt());
            center + p.rotate(tilt)
        })
        .rev()
        .collect()
}
