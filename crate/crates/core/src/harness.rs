//! Batch pipeline: dataset generation, re-auditing and method evaluation.
//!
//! Everything here works in memory and is deterministic; parallel stages
//! use the ambient rayon pool (see [`with_workers`]) and reduce in a fixed
//! order, so output never depends on the worker count.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::aoi::{stream_rng, Morphology, Stream};
use crate::builder::{build_instance, BuildConfig, ConfigError, Instance, Rejection, RejectionTally};
use crate::io::{instance_to_line, parse_instance_line, parse_lines, DatasetManifest, LineError, ResultRecord, DATASET_VERSION};
use crate::metrics::{evaluate_walk, validate_path, WalkError};
use crate::oracle::{hamiltonian_audit, Feasibility};
use crate::planners::{plan, PlannerId};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("count must be positive")]
    ZeroCount,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("gave up after {attempts} attempts with {admitted} of {count} instances admitted")]
    Exhausted { attempts: u64, admitted: usize, count: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error(transparent)]
    Parse(#[from] LineError),
    #[error("duplicate instance id {0}")]
    DuplicateId(String),
    #[error("{method} produced a malformed walk on {instance}: {source}")]
    MalformedWalk {
        instance: String,
        method: PlannerId,
        #[source]
        source: WalkError,
    },
    #[error("regenerated dataset does not match manifest checksum")]
    ChecksumMismatch,
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Instance seed of attempt `k` under base seed `seed`.
pub fn attempt_seed(seed: u64, k: u64) -> u64 {
    splitmix64(seed ^ splitmix64(k))
}

/// Family hint for an instance seed, drawn from its own sub-stream.
pub fn attempt_family(seed: u64, cfg: &BuildConfig) -> Morphology {
    cfg.family_weights.pick(stream_rng(seed, Stream::Family).random())
}

/// Attempts allowed per requested instance before generation gives up.
pub const ATTEMPTS_PER_INSTANCE: u64 = 50;

const BATCH_MIN: u64 = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub instances: Vec<Instance>,
    pub manifest: DatasetManifest,
    /// The JSON-Lines instance file, newline-terminated.
    pub text: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Builds the first `count` admitted instances of the attempt sequence.
///
/// Attempts run in parallel batches but are consumed strictly in attempt
/// order, so the dataset and the tallies (which cover attempts up to the
/// last admitted one) are independent of scheduling.
pub fn generate(count: usize, seed: u64, cfg: &BuildConfig) -> Result<Dataset, HarnessError> {
    if count == 0 {
        return Err(HarnessError::ZeroCount);
    }
    cfg.validate()?;
    let limit = ATTEMPTS_PER_INSTANCE.saturating_mul(count as u64).max(BATCH_MIN);
    let mut instances = Vec::with_capacity(count);
    let mut rejections = RejectionTally::new();
    let mut next = 0u64;
    'outer: while next < limit {
        let want = (count - instances.len()) as u64;
        let batch = (2 * want).max(BATCH_MIN).min(limit - next);
        let results: Vec<Result<Instance, Rejection>> = (next..next + batch)
            .into_par_iter()
            .map(|k| {
                let s = attempt_seed(seed, k);
                build_instance(attempt_family(s, cfg), s, cfg)
            })
            .collect();
        for r in results {
            next += 1;
            match r {
                Ok(inst) => {
                    instances.push(inst);
                    if instances.len() == count {
                        break 'outer;
                    }
                }
                Err(e) => *rejections.entry(e.kind().to_string()).or_default() += 1,
            }
        }
    }
    if instances.len() < count {
        return Err(HarnessError::Exhausted {
            attempts: next,
            admitted: instances.len(),
            count,
        });
    }
    let mut text = String::new();
    for inst in &instances {
        text.push_str(&instance_to_line(inst));
        text.push('\n');
    }
    let mut morphology_counts: BTreeMap<Morphology, usize> = Morphology::ALL.iter().map(|&m| (m, 0)).collect();
    for inst in &instances {
        *morphology_counts.entry(inst.aoi.morphology.label).or_default() += 1;
    }
    let manifest = DatasetManifest {
        version: DATASET_VERSION.to_string(),
        config: cfg.clone(),
        seed,
        count,
        attempts: next,
        morphology_counts,
        rejections,
        checksum: sha256_hex(text.as_bytes()),
    };
    Ok(Dataset {
        instances,
        manifest,
        text,
    })
}

/// Regenerates a dataset from its manifest and checks the checksum.
pub fn regenerate(manifest: &DatasetManifest) -> Result<Dataset, HarnessError> {
    let ds = generate(manifest.count, manifest.seed, &manifest.config)?;
    if ds.manifest.checksum != manifest.checksum {
        return Err(HarnessError::ChecksumMismatch);
    }
    Ok(ds)
}

/// Parses an instance file, rejecting empty files and duplicate ids.
pub fn load_dataset(text: &str) -> Result<Vec<Instance>, HarnessError> {
    let instances = parse_lines(text, parse_instance_line)?;
    if instances.is_empty() {
        return Err(HarnessError::EmptyDataset);
    }
    let mut seen = std::collections::BTreeSet::new();
    for inst in &instances {
        if !seen.insert(inst.id.as_str()) {
            return Err(HarnessError::DuplicateId(inst.id.clone()));
        }
    }
    Ok(instances)
}

#[derive(Clone, Debug, PartialEq)]
pub enum AuditVerdict {
    Feasible,
    Infeasible,
    Inconclusive,
    /// Parsed, but fails a structural or geometric check.
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditEntry {
    /// 1-based line in the instance file.
    pub line: usize,
    /// Instance id, when the line parsed far enough to have one.
    pub id: Option<String>,
    pub verdict: AuditVerdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
}

impl AuditReport {
    pub fn feasible(&self) -> usize {
        self.entries.iter().filter(|e| e.verdict == AuditVerdict::Feasible).count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditEntry> {
        self.entries.iter().filter(|e| e.verdict != AuditVerdict::Feasible)
    }

    pub fn passed(&self) -> bool {
        !self.entries.is_empty() && self.failures().next().is_none()
    }
}

/// Re-audits one instance with the oracle. A feasible verdict further
/// needs a witness that validates as a Hamiltonian walk and a graph that
/// matches its lattice geometry; infeasibility is reported as such even when
/// the geometry is also off, since it is the more specific finding.
pub fn audit_instance(inst: &Instance, budget: Option<u64>) -> AuditVerdict {
    let n = inst.graph.n_cells();
    if n > crate::oracle::MAX_AUDIT_CELLS {
        return AuditVerdict::Malformed(format!("{n} cells is beyond the oracle's range"));
    }
    let result = hamiltonian_audit(&inst.graph, budget);
    match result.outcome {
        Feasibility::Feasible => match result.witness.as_deref().map(|w| validate_path(&inst.graph, w)) {
            Some(Ok(v)) if v.status.is_hamiltonian() => match inst.graph.check_geometry() {
                Ok(()) => AuditVerdict::Feasible,
                Err(e) => AuditVerdict::Malformed(e.to_string()),
            },
            _ => AuditVerdict::Malformed("oracle witness does not validate".into()),
        },
        Feasibility::Infeasible => AuditVerdict::Infeasible,
        Feasibility::Inconclusive => AuditVerdict::Inconclusive,
    }
}

/// Audits every line of an instance file. Unparseable lines are reported
/// as malformed entries rather than aborting the audit.
pub fn audit_text(text: &str, budget: Option<u64>) -> Result<AuditReport, HarnessError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
        .collect();
    if lines.is_empty() {
        return Err(HarnessError::EmptyDataset);
    }
    let entries = lines
        .into_par_iter()
        .map(|(line, l)| match parse_instance_line(l) {
            Ok(inst) => AuditEntry {
                line,
                verdict: audit_instance(&inst, budget),
                id: Some(inst.id),
            },
            Err(e) => AuditEntry {
                line,
                id: None,
                verdict: AuditVerdict::Malformed(e.to_string()),
            },
        })
        .collect();
    Ok(AuditReport { entries })
}

/// Evaluates every method on every instance. Records come back sorted by
/// instance id, then method name.
pub fn run_methods(instances: &[Instance], methods: &[PlannerId]) -> Result<Vec<ResultRecord>, HarnessError> {
    let nested: Vec<Result<Vec<ResultRecord>, HarnessError>> = instances
        .par_iter()
        .map(|inst| methods.iter().map(|&m| evaluate(inst, m)).collect())
        .collect();
    let mut records = Vec::with_capacity(instances.len() * methods.len());
    for r in nested {
        records.extend(r?);
    }
    records.sort_by(|a, b| {
        a.instance_id
            .cmp(&b.instance_id)
            .then_with(|| a.method.name().cmp(b.method.name()))
    });
    Ok(records)
}

fn evaluate(inst: &Instance, method: PlannerId) -> Result<ResultRecord, HarnessError> {
    let planned = plan(&inst.graph, method);
    let m = evaluate_walk(&inst.graph, &planned.result.walk, planned.latency_ms).map_err(|source| {
        HarnessError::MalformedWalk {
            instance: inst.id.clone(),
            method,
            source,
        }
    })?;
    debug_assert_eq!(m.status, planned.result.status);
    Ok(ResultRecord {
        instance_id: inst.id.clone(),
        method,
        status: m.status,
        fail_reason: planned.result.fail_reason,
        walk: planned.result.walk,
        revisits: m.revisits,
        distance_norm: m.distance_norm,
        turns_rad: m.turns_rad,
        latency_ms: m.latency_ms,
    })
}
