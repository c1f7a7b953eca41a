//! On-disk formats: JSON-Lines instance and result files, the dataset
//! manifest, and generation config files.
//!
//! Every parser here takes untrusted text and returns a typed error; none
//! of them panic.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aoi::{AoiShape, Morphology, MorphologyClass};
use crate::builder::{BuildConfig, Instance};
use crate::geometry::{Frame, HexCell, OffsetCoord, Point, PolygonWithHoles};
use crate::graph::{CoverageGraph, NodeId};
use crate::metrics::Status;
use crate::oracle::MAX_AUDIT_CELLS;
use crate::planners::{FailReason, PlannerId};

pub const DATASET_VERSION: &str = "hexcover-dataset/1";

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid record: {0}")]
    Invalid(String),
}

/// A record error located in a file.
#[derive(Debug, Error)]
#[error("line {line}: {source}")]
pub struct LineError {
    pub line: usize,
    #[source]
    pub source: RecordError,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellRecord {
    pub col: i32,
    pub row: i32,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AoiRecord {
    pub outer: Vec<[f64; 2]>,
    pub holes: Vec<Vec<[f64; 2]>>,
}

/// One line of an instance file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRecord {
    pub id: String,
    pub seed: u64,
    pub family_hint: Morphology,
    pub morphology: MorphologyClass,
    pub hex_radius: f64,
    pub frame: Frame,
    pub aoi: AoiRecord,
    pub cells: Vec<CellRecord>,
    pub edges: Vec<[usize; 2]>,
    pub base: Point,
    pub terminal: Point,
    pub base_links: Vec<usize>,
    pub terminal_links: Vec<usize>,
    pub audited_feasible: bool,
}

fn ring_out(ring: &[Point]) -> Vec<[f64; 2]> {
    ring.iter().map(|p| [p.x, p.y]).collect()
}

fn ring_in(ring: &[[f64; 2]]) -> Vec<Point> {
    ring.iter().map(|&[x, y]| Point { x, y }).collect()
}

impl From<&Instance> for InstanceRecord {
    fn from(inst: &Instance) -> Self {
        let g = &inst.graph;
        Self {
            id: inst.id.clone(),
            seed: inst.seed,
            family_hint: inst.aoi.family_hint,
            morphology: inst.aoi.morphology,
            hex_radius: inst.hex_radius,
            frame: g.frame(),
            aoi: AoiRecord {
                outer: ring_out(&inst.aoi.polygon.outer),
                holes: inst.aoi.polygon.holes.iter().map(|h| ring_out(h)).collect(),
            },
            cells: g
                .cells()
                .iter()
                .map(|c| CellRecord {
                    col: c.coord.col,
                    row: c.coord.row,
                    x: c.center.x,
                    y: c.center.y,
                })
                .collect(),
            edges: g.cell_edges().into_iter().map(|(a, b)| [a, b]).collect(),
            base: g.base(),
            terminal: g.terminal(),
            base_links: g.base_links().to_vec(),
            terminal_links: g.terminal_links().to_vec(),
            audited_feasible: inst.audited_feasible,
        }
    }
}

impl InstanceRecord {
    /// Rebuilds the instance, checking structure (indices, links, finite
    /// coordinates, AOI validity) but not lattice geometry or feasibility.
    pub fn into_instance(self) -> Result<Instance, RecordError> {
        let bad = |m: String| RecordError::Invalid(format!("{}: {m}", self.id));
        if self.cells.len() > MAX_AUDIT_CELLS {
            return Err(bad(format!("{} cells exceeds the limit of {MAX_AUDIT_CELLS}", self.cells.len())));
        }
        if !(self.frame.origin.is_finite() && self.frame.angle.is_finite()) {
            return Err(bad("non-finite frame".into()));
        }
        let polygon = PolygonWithHoles::new(ring_in(&self.aoi.outer), self.aoi.holes.iter().map(|h| ring_in(h)).collect())
            .map_err(|e| bad(e.to_string()))?;
        let cells: Vec<HexCell> = self
            .cells
            .iter()
            .map(|c| HexCell::new(OffsetCoord::new(c.col, c.row), Point { x: c.x, y: c.y }, self.hex_radius))
            .collect();
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|&[a, b]| (a, b)).collect();
        let graph = CoverageGraph::new(
            cells,
            self.hex_radius,
            self.frame,
            &edges,
            self.base,
            self.terminal,
            self.base_links.clone(),
            self.terminal_links.clone(),
        )
        .map_err(|e| bad(e.to_string()))?;
        Ok(Instance {
            aoi: AoiShape {
                polygon,
                morphology: self.morphology,
                seed: self.seed,
                family_hint: self.family_hint,
            },
            hex_radius: self.hex_radius,
            graph,
            id: self.id,
            seed: self.seed,
            audited_feasible: self.audited_feasible,
        })
    }
}

pub fn instance_to_line(inst: &Instance) -> String {
    serde_json::to_string(&InstanceRecord::from(inst)).expect("instance records serialize")
}

pub fn parse_instance_line(line: &str) -> Result<Instance, RecordError> {
    serde_json::from_str::<InstanceRecord>(line)?.into_instance()
}

/// One line of a results file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRecord {
    pub instance_id: String,
    pub method: PlannerId,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fail_reason: Option<FailReason>,
    pub walk: Vec<NodeId>,
    pub revisits: usize,
    pub distance_norm: f64,
    pub turns_rad: f64,
    pub latency_ms: f64,
}

pub fn result_to_line(r: &ResultRecord) -> String {
    serde_json::to_string(r).expect("result records serialize")
}

pub fn parse_result_line(line: &str) -> Result<ResultRecord, RecordError> {
    let r: ResultRecord = serde_json::from_str(line)?;
    if r.walk.is_empty() {
        return Err(RecordError::Invalid(format!("{}/{}: empty walk", r.instance_id, r.method)));
    }
    if !(r.distance_norm.is_finite() && r.turns_rad.is_finite() && r.latency_ms.is_finite()) {
        return Err(RecordError::Invalid(format!("{}/{}: non-finite metric", r.instance_id, r.method)));
    }
    Ok(r)
}

/// Parses every non-blank line with `parse`, reporting 1-based line numbers.
pub fn parse_lines<T>(text: &str, parse: impl Fn(&str) -> Result<T, RecordError>) -> Result<Vec<T>, LineError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse(l).map_err(|source| LineError { line: i + 1, source }))
        .collect()
}

/// Dataset-level metadata written next to an instance file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub version: String,
    pub config: BuildConfig,
    /// Base seed; attempt `k` uses a seed derived from `(seed, k)`.
    pub seed: u64,
    pub count: usize,
    /// Attempts consumed, admitted or not.
    pub attempts: u64,
    /// Admitted instances by morphology label.
    pub morphology_counts: BTreeMap<Morphology, usize>,
    /// Rejections by kind.
    pub rejections: BTreeMap<String, usize>,
    /// SHA-256 of the instance file bytes, lowercase hex.
    pub checksum: String,
}

pub fn manifest_to_string(m: &DatasetManifest) -> String {
    let mut s = serde_json::to_string_pretty(m).expect("manifests serialize");
    s.push('\n');
    s
}

pub fn parse_manifest(text: &str) -> Result<DatasetManifest, RecordError> {
    let m: DatasetManifest = serde_json::from_str(text)?;
    if m.version != DATASET_VERSION {
        return Err(RecordError::Invalid(format!(
            "unsupported manifest version {:?}, expected {DATASET_VERSION:?}",
            m.version
        )));
    }
    m.config.validate().map_err(|e| RecordError::Invalid(e.to_string()))?;
    if m.checksum.len() != 64 || !m.checksum.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(RecordError::Invalid("checksum is not a SHA-256 hex digest".into()));
    }
    Ok(m)
}

/// Generation config: a JSON object overriding any subset of the defaults.
pub fn parse_config(text: &str) -> Result<BuildConfig, RecordError> {
    let cfg: BuildConfig = serde_json::from_str(text)?;
    cfg.validate().map_err(|e| RecordError::Invalid(e.to_string()))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::build_instance;

    fn sample() -> Instance {
        let cfg = BuildConfig::default();
        (0..50u64)
            .find_map(|s| build_instance(Morphology::Irregular, s, &cfg).ok())
            .expect("some seed is admitted")
    }

    #[test]
    fn instance_round_trip_is_exact() {
        let inst = sample();
        let line = instance_to_line(&inst);
        assert!(!line.contains('\n'));
        let back = parse_instance_line(&line).unwrap();
        assert_eq!(back, inst);
        assert_eq!(instance_to_line(&back), line);
        back.graph.check_geometry().unwrap();
    }

    #[test]
    fn structural_errors_are_rejected() {
        let inst = sample();
        let mut rec = InstanceRecord::from(&inst);
        rec.edges.push([0, 10_000]);
        assert!(rec.clone().into_instance().is_err());
        let mut rec = InstanceRecord::from(&inst);
        rec.base_links.clear();
        assert!(rec.into_instance().is_err());
        let mut rec = InstanceRecord::from(&inst);
        rec.hex_radius = -1.0;
        assert!(rec.into_instance().is_err());
        let mut rec = InstanceRecord::from(&inst);
        rec.aoi.outer.truncate(2);
        assert!(rec.into_instance().is_err());
        assert!(matches!(parse_instance_line("{"), Err(RecordError::Json(_))));
        let extra = instance_to_line(&inst).replacen('{', "{\"bogus\":1,", 1);
        assert!(parse_instance_line(&extra).is_err());
    }

    #[test]
    fn result_round_trip() {
        let r = ResultRecord {
            instance_id: "hex-0000000000000001".into(),
            method: PlannerId::WarnsdorffEpDist,
            status: Status::Fail,
            fail_reason: Some(FailReason::DeadEnd),
            walk: vec![40, 3, 4],
            revisits: 0,
            distance_norm: 0.123_456_789_012_345_67,
            turns_rad: 1.0 / 3.0,
            latency_ms: 0.01,
        };
        let line = result_to_line(&r);
        assert!(line.contains("\"warnsdorff-ep-dist\""));
        assert!(line.contains("\"dead-end\""));
        assert_eq!(parse_result_line(&line).unwrap(), r);
        let empty = line.replace("[40,3,4]", "[]");
        assert!(parse_result_line(&empty).is_err());
    }

    #[test]
    fn line_numbers_count_blank_lines() {
        let text = "{\"a\":1}\n\nnot json\n";
        let err = parse_lines(text, |l| serde_json::from_str::<serde_json::Value>(l).map_err(RecordError::from)).unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn config_overrides_and_validation() {
        let cfg = parse_config("{\"min_cells\": 30}").unwrap();
        assert_eq!(cfg.min_cells, 30);
        assert_eq!(cfg.max_cells, BuildConfig::default().max_cells);
        assert!(parse_config("{\"min_cells\": 60}").is_err());
        assert!(parse_config("{\"min_cell\": 30}").is_err());
        assert_eq!(parse_config("{}").unwrap(), BuildConfig::default());
    }

    #[test]
    fn manifest_checks() {
        let m = DatasetManifest {
            version: DATASET_VERSION.into(),
            config: BuildConfig::default(),
            seed: 7,
            count: 1,
            attempts: 1,
            morphology_counts: BTreeMap::from([(Morphology::Compact, 1)]),
            rejections: BTreeMap::new(),
            checksum: "0".repeat(64),
        };
        let text = manifest_to_string(&m);
        assert_eq!(parse_manifest(&text).unwrap(), m);
        assert!(parse_manifest(&text.replace(DATASET_VERSION, "other/9")).is_err());
        assert!(parse_manifest(&text.replace(&"0".repeat(64), "xyz")).is_err());
    }
}
