use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hexcover::harness::load_dataset;
use hexcover::io::{instance_to_line, parse_lines, parse_result_line, result_to_line, InstanceRecord, ResultRecord};

fn hexcover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hexcover"))
        .args(args)
        .env_remove("HEXCOVER_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn generate(dir: &Path, name: &str, count: usize, seed: u64) -> PathBuf {
    let out = dir.join(name);
    let o = hexcover(&["generate", "--count", &count.to_string(), "--seed", &seed.to_string(), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

fn records(path: &Path) -> Vec<ResultRecord> {
    parse_lines(&fs::read_to_string(path).unwrap(), parse_result_line).unwrap()
}

#[test]
fn generate_is_byte_deterministic_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), "a.jsonl", 10, 42);
    let b = generate(dir.path(), "b.jsonl", 10, 42);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let replay = dir.path().join("c.jsonl");
    let manifest = a.with_extension("manifest.json");
    let o = hexcover(&["generate", "--from-manifest", p(&manifest), "--out", p(&replay), "--workers", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&replay).unwrap());
    assert_eq!(
        fs::read(&manifest).unwrap(),
        fs::read(replay.with_extension("manifest.json")).unwrap()
    );
    let other = generate(dir.path(), "d.jsonl", 10, 43);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&other).unwrap());
}

#[test]
fn generated_instances_are_in_band_and_audit_clean() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "d.jsonl", 12, 7);
    for inst in load_dataset(&fs::read_to_string(&data).unwrap()).unwrap() {
        assert!((28..=46).contains(&inst.graph.n_cells()));
        assert!(inst.audited_feasible);
    }
    let manifest = data.with_extension("manifest.json");
    let o = hexcover(&["audit", "--dataset", p(&data), "--manifest", p(&manifest)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("12/12 instances feasible"));
}

/// Cuts every edge but one from an unlinked cell. A cell with one neighbour
/// can only be a walk endpoint, and an unlinked cell cannot be one, so the
/// instance becomes infeasible.
fn break_feasibility(line: &str) -> (String, String) {
    let inst = hexcover::io::parse_instance_line(line).unwrap();
    let mut rec = InstanceRecord::from(&inst);
    let linked = |c: usize| rec.base_links.contains(&c) || rec.terminal_links.contains(&c);
    let degree = |c: usize| rec.edges.iter().filter(|e| e.contains(&c)).count();
    let victim = (0..rec.cells.len()).find(|&c| !linked(c) && degree(c) >= 2).expect("an interior cell");
    let keep = *rec.edges.iter().find(|e| e.contains(&victim)).unwrap();
    rec.edges.retain(|e| !e.contains(&victim) || *e == keep);
    let id = rec.id.clone();
    (instance_to_line(&rec.into_instance().unwrap()), id)
}

#[test]
fn audit_names_an_infeasible_instance() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "d.jsonl", 4, 3);
    let text = fs::read_to_string(&data).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let (broken, id) = break_feasibility(&lines[2]);
    lines[2] = broken;
    let mutated = dir.path().join("m.jsonl");
    fs::write(&mutated, lines.join("\n") + "\n").unwrap();
    let o = hexcover(&["audit", "--dataset", p(&mutated), "--budget", "0"]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains(&format!("line 3: {id}: infeasible")), "{err}");
    assert!(String::from_utf8_lossy(&o.stdout).contains("3/4"));
    // The checksum no longer matches either.
    let manifest = data.with_extension("manifest.json");
    let o = hexcover(&["audit", "--dataset", p(&mutated), "--manifest", p(&manifest)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn empty_and_missing_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let o = hexcover(&["audit", "--dataset", p(&empty)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("dataset is empty"));
    let o = hexcover(&["run", "--dataset", p(&empty), "--out", p(&dir.path().join("r.jsonl"))]);
    assert_eq!(code(&o), 1);
    let o = hexcover(&["audit", "--dataset", p(&dir.path().join("absent.jsonl"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn parse_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "d.jsonl", 2, 5);
    let mut text = fs::read_to_string(&data).unwrap();
    text.push_str("{\"id\": 3}\n");
    fs::write(&data, &text).unwrap();
    let o = hexcover(&["run", "--dataset", p(&data), "--out", p(&dir.path().join("r.jsonl"))]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn run_all_on_hundred_instances_gives_1700_records() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "d.jsonl", 100, 11);
    let r1 = dir.path().join("r1.jsonl");
    let r8 = dir.path().join("r8.jsonl");
    let o = hexcover(&["run", "--dataset", p(&data), "--methods", "all", "--out", p(&r1), "--workers", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = Command::new(env!("CARGO_BIN_EXE_hexcover"))
        .args(["run", "--dataset", p(&data), "--out", p(&r8)])
        .env("HEXCOVER_WORKERS", "8")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut a = records(&r1);
    let mut b = records(&r8);
    assert_eq!(a.len(), 1700);
    for r in a.iter_mut().chain(b.iter_mut()) {
        if r.status.is_hamiltonian() {
            assert_eq!(r.revisits, 0);
        }
        r.latency_ms = 0.0;
    }
    assert_eq!(a, b);
}

#[test]
fn unknown_method_lists_valid_names() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "d.jsonl", 1, 1);
    let o = hexcover(&[
        "run",
        "--dataset",
        p(&data),
        "--methods",
        "boustrophedon,zigzag",
        "--out",
        p(&dir.path().join("r.jsonl")),
    ]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("zigzag") && err.contains("warnsdorff-ti-index") && err.contains("morton"), "{err}");
}

#[test]
fn report_formats_strata_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "d.jsonl", 8, 2);
    let results = dir.path().join("r.jsonl");
    let o = hexcover(&["run", "--dataset", p(&data), "--out", p(&results)]);
    assert_eq!(code(&o), 0);
    let out = dir.path().join("report");
    let plots = dir.path().join("plots");
    let o = hexcover(&[
        "report",
        "--results",
        p(&results),
        "--dataset",
        p(&data),
        "--strata",
        "morphology",
        "--plots",
        p(&plots),
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let md = fs::read_to_string(out.join("report.md")).unwrap();
    assert!(md.contains("| Morphology | n |"));
    assert!(plots.join("hsr.svg").exists() && plots.join("revisits_vs_distance.svg").exists());

    let o = hexcover(&["report", "--results", p(&results), "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(hexcover::report::parse_summary_csv(&csv).unwrap().len(), 17);

    let o = hexcover(&["report", "--results", p(&results), "--strata", "morphology"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn report_rejects_tampered_and_incomplete_results() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "d.jsonl", 3, 4);
    let results = dir.path().join("r.jsonl");
    assert_eq!(code(&hexcover(&["run", "--dataset", p(&data), "--out", p(&results)])), 0);
    let text = fs::read_to_string(&results).unwrap();

    let short = dir.path().join("short.jsonl");
    let lines: Vec<&str> = text.lines().collect();
    fs::write(&short, lines[1..].join("\n")).unwrap();
    let o = hexcover(&["report", "--results", p(&short), "--dataset", p(&data)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("incomplete"), "{}", stderr(&o));

    let forged = dir.path().join("forged.jsonl");
    let mut recs = records(&results);
    recs[0].revisits += 1;
    let body: String = recs.iter().map(|r| result_to_line(r) + "\n").collect();
    fs::write(&forged, body).unwrap();
    let o = hexcover(&["report", "--results", p(&forged), "--dataset", p(&data)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("revisits"), "{}", stderr(&o));
}

#[test]
fn bad_config_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, "{\"min_cells\": 50, \"max_cells\": 40}").unwrap();
    let o = hexcover(&["generate", "--count", "1", "--config", p(&cfg), "--out", p(&dir.path().join("d.jsonl"))]);
    assert_eq!(code(&o), 1);
    let o = hexcover(&["generate", "--count", "1", "--out", p(&dir.path().join("no/such/dir/d.jsonl"))]);
    assert_eq!(code(&o), 2);
}
