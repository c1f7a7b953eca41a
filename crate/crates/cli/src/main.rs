//! `hexcover`: generate, audit, run and report coverage benchmarks.
//!
//! Exit codes: 0 success, 1 validation failure, 2 I/O failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hexcover::builder::BuildConfig;
use hexcover::harness::{self, AuditVerdict, HarnessError};
use hexcover::io::{self, manifest_to_string, parse_manifest, result_to_line};
use hexcover::planners::parse_methods;
use hexcover::report::{self, ReportError};

#[derive(Parser)]
#[command(name = "hexcover", version, about = "Coverage path planning benchmark on hexagonal graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an audited dataset and its manifest.
    Generate {
        #[arg(long, required_unless_present = "from_manifest")]
        count: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON object overriding generation defaults.
        #[arg(long, conflicts_with = "from_manifest")]
        config: Option<PathBuf>,
        /// Replay the count, seed and config of an existing manifest and
        /// check the result against its checksum.
        #[arg(long, conflicts_with_all = ["count", "seed"])]
        from_manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Manifest path [default: OUT with extension .manifest.json].
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        workers: Workers,
    },
    /// Re-audit every instance of a dataset.
    Audit {
        #[arg(long)]
        dataset: PathBuf,
        /// Oracle node budget; 0 means unlimited.
        #[arg(long, default_value_t = default_budget())]
        budget: u64,
        /// Also check the dataset against this manifest's checksum.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        workers: Workers,
    },
    /// Evaluate planners on every instance.
    Run {
        #[arg(long)]
        dataset: PathBuf,
        /// Comma-separated canonical method names, or "all".
        #[arg(long, default_value = "all")]
        methods: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        workers: Workers,
    },
    /// Summarise a results file.
    Report {
        #[arg(long)]
        results: PathBuf,
        /// Instance file; enables walk re-validation, completeness against
        /// the dataset, and strata.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Markdown)]
        format: Format,
        #[arg(long, value_enum)]
        strata: Option<Strata>,
        /// Directory for SVG plots.
        #[arg(long)]
        plots: Option<PathBuf>,
        /// Output directory; tables go to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct Workers {
    /// Worker threads [default: available parallelism].
    #[arg(long, env = "HEXCOVER_WORKERS")]
    workers: Option<usize>,
}

impl Workers {
    fn count(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Markdown,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strata {
    Morphology,
}

fn default_budget() -> u64 {
    BuildConfig::default().audit_budget.unwrap_or(0)
}

enum Failure {
    Validation(String),
    Io(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<io::RecordError> for Failure {
    fn from(e: io::RecordError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<io::LineError> for Failure {
    fn from(e: io::LineError) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn mkdir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn generate(
    count: Option<usize>,
    seed: u64,
    config: Option<PathBuf>,
    from_manifest: Option<PathBuf>,
    out: PathBuf,
    manifest: Option<PathBuf>,
    workers: usize,
) -> Result<(), Failure> {
    let ds = match from_manifest {
        Some(path) => {
            let m = parse_manifest(&read(&path)?)?;
            harness::with_workers(workers, || harness::regenerate(&m))??
        }
        None => {
            let cfg = match config {
                Some(path) => io::parse_config(&read(&path)?)?,
                None => BuildConfig::default(),
            };
            let count = count.expect("clap requires --count without --from-manifest");
            harness::with_workers(workers, || harness::generate(count, seed, &cfg))??
        }
    };
    write(&out, &ds.text)?;
    let manifest = manifest.unwrap_or_else(|| out.with_extension("manifest.json"));
    write(&manifest, &manifest_to_string(&ds.manifest))?;
    let m = &ds.manifest;
    eprintln!(
        "admitted {} of {} attempts; morphology {:?}; rejections {:?}",
        m.count, m.attempts, m.morphology_counts, m.rejections
    );
    Ok(())
}

fn audit(dataset: PathBuf, budget: u64, manifest: Option<PathBuf>, workers: usize) -> Result<(), Failure> {
    let text = read(&dataset)?;
    if let Some(path) = manifest {
        let m = parse_manifest(&read(&path)?)?;
        if harness::sha256_hex(text.as_bytes()) != m.checksum {
            return Err(Failure::Validation(format!(
                "{} does not match the checksum in {}",
                dataset.display(),
                path.display()
            )));
        }
    }
    let budget = (budget > 0).then_some(budget);
    let report = harness::with_workers(workers, || harness::audit_text(&text, budget))??;
    for e in report.failures() {
        let what = match &e.verdict {
            AuditVerdict::Infeasible => "infeasible".to_string(),
            AuditVerdict::Inconclusive => "inconclusive (budget exhausted)".to_string(),
            AuditVerdict::Malformed(why) => format!("malformed: {why}"),
            AuditVerdict::Feasible => unreachable!("failures exclude feasible entries"),
        };
        eprintln!("line {}: {}: {what}", e.line, e.id.as_deref().unwrap_or("<unparsed>"));
    }
    let total = report.entries.len();
    let ok = report.feasible();
    println!("{ok}/{total} instances feasible ({:.1}%)", 100.0 * ok as f64 / total as f64);
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Validation(format!("{} of {total} instances failed the audit", total - ok)))
    }
}

fn run(dataset: PathBuf, methods: String, out: PathBuf, workers: usize) -> Result<(), Failure> {
    let methods = parse_methods(&methods).map_err(|e| Failure::Validation(e.to_string()))?;
    let instances = harness::load_dataset(&read(&dataset)?)?;
    let records = harness::with_workers(workers, || harness::run_methods(&instances, &methods))??;
    let mut text = String::with_capacity(records.len() * 256);
    for r in &records {
        text.push_str(&result_to_line(r));
        text.push('\n');
    }
    write(&out, &text)?;
    eprintln!("{} records for {} instances", records.len(), instances.len());
    Ok(())
}

fn report(
    results: PathBuf,
    dataset: Option<PathBuf>,
    format: Format,
    strata: Option<Strata>,
    plots: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let records = io::parse_lines(&read(&results)?, io::parse_result_line)?;
    let instances = match &dataset {
        Some(path) => Some(harness::load_dataset(&read(path)?)?),
        None => None,
    };
    let rep = report::build_report(&records, instances.as_deref(), strata.is_some())?;
    let mut files: Vec<(&str, String)> = match format {
        Format::Markdown => vec![("report.md", report::render_markdown(&rep))],
        Format::Csv => {
            let mut f = vec![("summary.csv", report::summary_csv(&rep.summary)?)];
            if let Some(s) = &rep.strata {
                f.push(("strata.csv", report::strata_csv(s)?));
            }
            f
        }
    };
    match out {
        Some(dir) => {
            mkdir(&dir)?;
            for (name, body) in &files {
                write(&dir.join(name), body)?;
            }
        }
        None => {
            let last = files.len() - 1;
            for (i, (_, body)) in files.iter_mut().enumerate() {
                print!("{body}");
                if i < last {
                    println!();
                }
            }
        }
    }
    if let Some(dir) = plots {
        mkdir(&dir)?;
        write(&dir.join("hsr.svg"), &report::hsr_bar_svg(&rep.summary))?;
        write(&dir.join("revisits_vs_distance.svg"), &report::quality_scatter_svg(&rep.summary))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let failed = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(u8::from(failed));
        }
    };
    let outcome = match cli.command {
        Command::Generate {
            count,
            seed,
            config,
            from_manifest,
            out,
            manifest,
            workers,
        } => generate(count, seed, config, from_manifest, out, manifest, workers.count()),
        Command::Audit {
            dataset,
            budget,
            manifest,
            workers,
        } => audit(dataset, budget, manifest, workers.count()),
        Command::Run {
            dataset,
            methods,
            out,
            workers,
        } => run(dataset, methods, out, workers.count()),
        Command::Report {
            results,
            dataset,
            format,
            strata,
            plots,
            out,
        } => report(results, dataset, format, strata, plots, out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
