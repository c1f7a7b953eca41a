//! Summary tables and plots over a results file.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::aoi::Morphology;
use crate::builder::Instance;
use crate::io::ResultRecord;
use crate::metrics::{aggregate_summary, evaluate_walk, AggregateError, Evaluation, PathMetrics, SummaryRow, WalkError};
use crate::planners::PlannerId;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error("result references unknown instance {0}")]
    UnknownInstance(String),
    #[error("stored {field} of {method} on {instance} does not match its walk")]
    Tampered {
        instance: String,
        method: PlannerId,
        field: &'static str,
    },
    #[error("walk of {method} on {instance} is invalid: {source}")]
    InvalidWalk {
        instance: String,
        method: PlannerId,
        #[source]
        source: WalkError,
    },
    #[error("morphology strata need the dataset")]
    StrataNeedDataset,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Warnsdorff success rates within one morphology stratum.
#[derive(Clone, Debug, PartialEq)]
pub struct StratumRow {
    pub morphology: Morphology,
    pub n: usize,
    /// In [`PlannerId::WARNSDORFF`] order; absent when the method was not run.
    pub hsr_pct: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub summary: Vec<SummaryRow>,
    pub strata: Option<Vec<StratumRow>>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Re-validates every stored walk against its instance and checks that the
/// stored status and metrics are the ones the walk produces.
pub fn verify_results(records: &[ResultRecord], instances: &[Instance]) -> Result<(), ReportError> {
    let by_id: BTreeMap<&str, &Instance> = instances.iter().map(|i| (i.id.as_str(), i)).collect();
    for r in records {
        let inst = by_id
            .get(r.instance_id.as_str())
            .ok_or_else(|| ReportError::UnknownInstance(r.instance_id.clone()))?;
        let m = evaluate_walk(&inst.graph, &r.walk, r.latency_ms).map_err(|source| ReportError::InvalidWalk {
            instance: r.instance_id.clone(),
            method: r.method,
            source,
        })?;
        let tampered = |field| ReportError::Tampered {
            instance: r.instance_id.clone(),
            method: r.method,
            field,
        };
        if m.status != r.status {
            return Err(tampered("status"));
        }
        if m.revisits != r.revisits {
            return Err(tampered("revisits"));
        }
        if !close(m.distance_norm, r.distance_norm) {
            return Err(tampered("distance_norm"));
        }
        if !close(m.turns_rad, r.turns_rad) {
            return Err(tampered("turns_rad"));
        }
    }
    Ok(())
}

fn metrics(r: &ResultRecord) -> PathMetrics {
    PathMetrics {
        status: r.status,
        revisits: r.revisits,
        distance_norm: r.distance_norm,
        turns_rad: r.turns_rad,
        latency_ms: r.latency_ms,
    }
}

/// Builds the report. With a dataset, every dataset instance must have a
/// record for every method present, and walks are re-validated.
pub fn build_report(records: &[ResultRecord], dataset: Option<&[Instance]>, strata: bool) -> Result<Report, ReportError> {
    if let Some(instances) = dataset {
        verify_results(records, instances)?;
        let methods: BTreeSet<PlannerId> = records.iter().map(|r| r.method).collect();
        let have: BTreeSet<(&str, PlannerId)> = records.iter().map(|r| (r.instance_id.as_str(), r.method)).collect();
        let missing: Vec<(String, String)> = methods
            .iter()
            .flat_map(|&m| instances.iter().map(move |i| (m, i)))
            .filter(|(m, i)| !have.contains(&(i.id.as_str(), *m)))
            .map(|(m, i)| (m.to_string(), i.id.clone()))
            .collect();
        if !missing.is_empty() {
            return Err(AggregateError::Incomplete { missing }.into());
        }
    }
    let evals: Vec<Evaluation<'_>> = records
        .iter()
        .map(|r| Evaluation {
            instance: &r.instance_id,
            method: r.method,
            metrics: metrics(r),
        })
        .collect();
    let summary = aggregate_summary(&evals)?;
    let strata = if strata {
        Some(stratify(records, dataset.ok_or(ReportError::StrataNeedDataset)?))
    } else {
        None
    };
    Ok(Report { summary, strata })
}

/// Warnsdorff success rates by morphology label.
pub fn stratify(records: &[ResultRecord], instances: &[Instance]) -> Vec<StratumRow> {
    let label: BTreeMap<&str, Morphology> = instances.iter().map(|i| (i.id.as_str(), i.aoi.morphology.label)).collect();
    let mut tally: BTreeMap<(Morphology, PlannerId), (usize, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.method.warnsdorff_config().is_some()) {
        if let Some(&m) = label.get(r.instance_id.as_str()) {
            let e = tally.entry((m, r.method)).or_default();
            e.0 += 1;
            e.1 += usize::from(r.status.is_hamiltonian());
        }
    }
    Morphology::ALL
        .iter()
        .map(|&m| StratumRow {
            morphology: m,
            n: label.values().filter(|&&l| l == m).count(),
            hsr_pct: PlannerId::WARNSDORFF
                .iter()
                .map(|&id| tally.get(&(m, id)).map(|&(n, h)| 100.0 * h as f64 / n as f64))
                .collect(),
        })
        .collect()
}

const ABSENT: &str = "—";

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| ABSENT.to_string(), |x| format!("{x:.digits$}"))
}

fn mean_sd(mean: Option<f64>, sd: Option<f64>, digits: usize) -> String {
    match (mean, sd) {
        (Some(m), Some(s)) => format!("{m:.digits$} ± {s:.digits$}"),
        (Some(m), None) => format!("{m:.digits$}"),
        _ => ABSENT.to_string(),
    }
}

fn table(out: &mut String, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}|", header.iter().map(|_| "---").collect::<Vec<_>>().join("|"));
    for row in rows {
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
}

/// Success-rate table: one row per method.
pub fn success_table(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    table(
        &mut out,
        &["Method", "Family", "HSR (%)", "CCR (%)"],
        rows.iter().map(|r| {
            vec![
                r.method.title().to_string(),
                r.method.family().title().to_string(),
                format!("{:.1}", r.hsr_pct),
                format!("{:.1}", r.ccr_pct),
            ]
        }),
    );
    out
}

/// Path-quality table over each method's coverage-complete subset.
pub fn quality_table(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    table(
        &mut out,
        &["Method", "Revisits", "Distance (norm.)", "Turns (rad)", "Latency (ms)"],
        rows.iter().map(|r| {
            vec![
                r.method.title().to_string(),
                mean_sd(r.revisits_mean, r.revisits_sd, 2),
                mean_sd(r.distance_mean, r.distance_sd, 2),
                mean_sd(r.turns_mean, r.turns_sd, 2),
                format!("{:.4}", r.latency_mean_ms),
            ]
        }),
    );
    out
}

/// The Warnsdorff slice of the success table.
pub fn warnsdorff_table(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    table(
        &mut out,
        &["Method", "Policy", "Tie-break", "HSR (%)"],
        rows.iter().filter_map(|r| {
            let cfg = r.method.warnsdorff_config()?;
            Some(vec![
                r.method.title().to_string(),
                format!("{:?}", cfg.policy).to_uppercase(),
                format!("{:?}", cfg.tie_break).to_lowercase(),
                format!("{:.1}", r.hsr_pct),
            ])
        }),
    );
    out
}

pub fn strata_table(strata: &[StratumRow]) -> String {
    let mut header = vec!["Morphology", "n"];
    header.extend(PlannerId::WARNSDORFF.iter().map(|id| id.title()));
    let mut out = String::new();
    table(
        &mut out,
        &header,
        strata.iter().map(|s| {
            let mut row = vec![s.morphology.title().to_string(), s.n.to_string()];
            row.extend(s.hsr_pct.iter().map(|&v| opt(v, 1)));
            row
        }),
    );
    out
}

pub fn render_markdown(report: &Report) -> String {
    let mut out = String::from("# Coverage benchmark report\n\n");
    let n = report.summary.first().map_or(0, |r| r.instances);
    let _ = writeln!(out, "{n} instances, {} methods.\n", report.summary.len());
    out.push_str("## Success rates\n\n");
    out.push_str(&success_table(&report.summary));
    out.push_str("\n## Path quality (coverage-complete subset, mean ± sd)\n\n");
    out.push_str(&quality_table(&report.summary));
    out.push_str("\n## Warnsdorff variants\n\n");
    out.push_str(&warnsdorff_table(&report.summary));
    if let Some(strata) = &report.strata {
        out.push_str("\n## Warnsdorff HSR (%) by morphology\n\n");
        out.push_str(&strata_table(strata));
    }
    out
}

/// Full-precision summary CSV; [`parse_summary_csv`] reads it back exactly.
pub fn summary_csv(rows: &[SummaryRow]) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn parse_summary_csv(text: &str) -> Result<Vec<SummaryRow>, ReportError> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(ReportError::from)
}

pub fn strata_csv(strata: &[StratumRow]) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["morphology".to_string(), "n".to_string()];
    header.extend(PlannerId::WARNSDORFF.iter().map(|id| id.name().to_string()));
    w.write_record(&header)?;
    for s in strata {
        let mut row = vec![s.morphology.name().to_string(), s.n.to_string()];
        row.extend(s.hsr_pct.iter().map(|v| v.map_or_else(String::new, |x| x.to_string())));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Grouped bars of HSR and CCR per method.
pub fn hsr_bar_svg(rows: &[SummaryRow]) -> String {
    let (left, top, plot_h, bar, gap) = (60.0, 30.0, 300.0, 14.0, 12.0);
    let width = left + rows.len() as f64 * (2.0 * bar + gap) + 20.0;
    let height = top + plot_h + 150.0;
    let y = |pct: f64| top + plot_h * (1.0 - pct / 100.0);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" font-family=\"sans-serif\" font-size=\"11\">\n"
    );
    let _ = writeln!(s, "<text x=\"{left}\" y=\"18\" font-size=\"13\">HSR and CCR by method (%)</text>");
    for pct in [0.0, 25.0, 50.0, 75.0, 100.0] {
        let _ = writeln!(
            s,
            "<line x1=\"{left}\" x2=\"{:.1}\" y1=\"{y:.1}\" y2=\"{y:.1}\" stroke=\"#ddd\"/><text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{pct:.0}</text>",
            width - 20.0,
            left - 6.0,
            y(pct) + 4.0,
            y = y(pct)
        );
    }
    for (i, r) in rows.iter().enumerate() {
        let x = left + gap / 2.0 + i as f64 * (2.0 * bar + gap);
        for (k, (v, colour)) in [(r.hsr_pct, "#3b6fb6"), (r.ccr_pct, "#9cc3e6")].into_iter().enumerate() {
            let _ = writeln!(
                s,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{bar}\" height=\"{:.1}\" fill=\"{colour}\"><title>{} {}: {v:.1}</title></rect>",
                x + k as f64 * bar,
                y(v),
                top + plot_h - y(v),
                escape(r.method.title()),
                if k == 0 { "HSR" } else { "CCR" }
            );
        }
        let lx = x + bar;
        let ly = top + plot_h + 10.0;
        let _ = writeln!(
            s,
            "<text x=\"{lx:.1}\" y=\"{ly:.1}\" transform=\"rotate(60 {lx:.1} {ly:.1})\">{}</text>",
            escape(r.method.name())
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Mean revisits against mean normalised distance, one point per method
/// with a coverage-complete subset.
pub fn quality_scatter_svg(rows: &[SummaryRow]) -> String {
    let pts: Vec<(f64, f64, &str)> = rows
        .iter()
        .filter_map(|r| Some((r.distance_mean?, r.revisits_mean?, r.method.name())))
        .collect();
    let (left, top, w, h) = (60.0, 30.0, 520.0, 360.0);
    let max_x = pts.iter().map(|p| p.0).fold(1.0, f64::max) * 1.05;
    let max_y = pts.iter().map(|p| p.1).fold(1.0, f64::max) * 1.05;
    let sx = |x: f64| left + w * x / max_x;
    let sy = |y: f64| top + h * (1.0 - y / max_y);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" font-family=\"sans-serif\" font-size=\"11\">\n",
        left + w + 160.0,
        top + h + 50.0
    );
    let _ = writeln!(s, "<text x=\"{left}\" y=\"18\" font-size=\"13\">Mean revisits vs. mean normalised distance</text>");
    let _ = writeln!(
        s,
        "<rect x=\"{left}\" y=\"{top}\" width=\"{w}\" height=\"{h}\" fill=\"none\" stroke=\"#999\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">distance (0 – {max_x:.1})</text>",
        left + w / 2.0,
        top + h + 30.0
    );
    let _ = writeln!(
        s,
        "<text x=\"20\" y=\"{:.1}\" transform=\"rotate(-90 20 {:.1})\" text-anchor=\"middle\">revisits (0 – {max_y:.1})</text>",
        top + h / 2.0,
        top + h / 2.0
    );
    for (x, y, name) in pts {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"4\" fill=\"#3b6fb6\"/><text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
            sx(x),
            sy(y),
            sx(x) + 6.0,
            sy(y) + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}
