//! Stable-toolchain smoke fuzzing of every parser entry point, seeded from
//! the checked-in fuzz corpus. The cargo-fuzz targets under `fuzz/` cover
//! the same entry points with coverage guidance.

use std::fs;
use std::path::PathBuf;

use hexcover::io::{
    instance_to_line, manifest_to_string, parse_config, parse_instance_line, parse_manifest, parse_result_line,
    result_to_line,
};
use hexcover::report::{parse_summary_csv, summary_csv};
use proptest::prelude::*;

fn seeds(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<String> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| fs::read_to_string(e.unwrap().path()).unwrap())
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[derive(Clone, Debug)]
enum Edit {
    Truncate(usize),
    Delete(usize, usize),
    Insert(usize, String),
    Replace(usize, char),
}

fn edit() -> impl Strategy<Value = Edit> {
    prop_oneof![
        any::<usize>().prop_map(Edit::Truncate),
        (any::<usize>(), 1usize..16).prop_map(|(a, n)| Edit::Delete(a, n)),
        (any::<usize>(), "[-0-9eE.,:\\[\\]{}\" a-z]{1,8}").prop_map(|(a, s)| Edit::Insert(a, s)),
        (any::<usize>(), prop::char::any()).prop_map(|(a, c)| Edit::Replace(a, c)),
    ]
}

fn boundary(s: &str, at: usize) -> usize {
    let mut i = at % (s.len() + 1);
    while !s.is_char_boundary(i) {
        i -= 1;
    }
    i
}

fn apply(mut s: String, edits: &[Edit]) -> String {
    for e in edits {
        match e {
            Edit::Truncate(at) => {
                let i = boundary(&s, *at);
                s.truncate(i);
            }
            Edit::Delete(at, n) => {
                let i = boundary(&s, *at);
                let j = boundary(&s, i + n);
                if j > i {
                    s.replace_range(i..j, "");
                }
            }
            Edit::Insert(at, text) => {
                let i = boundary(&s, *at);
                s.insert_str(i, text);
            }
            Edit::Replace(at, c) => {
                let i = boundary(&s, *at);
                if let Some(old) = s[i..].chars().next() {
                    s.replace_range(i..i + old.len_utf8(), &c.to_string());
                }
            }
        }
    }
    s
}

fn mutated(target: &'static str) -> impl Strategy<Value = String> {
    let seeds = seeds(target);
    (0..seeds.len(), prop::collection::vec(edit(), 0..6)).prop_map(move |(k, edits)| apply(seeds[k].clone(), &edits))
}

#[test]
fn seeds_parse() {
    for s in seeds("instance_line") {
        parse_instance_line(&s).unwrap();
    }
    for s in seeds("result_line") {
        parse_result_line(&s).unwrap();
    }
    for s in seeds("manifest") {
        parse_manifest(&s).unwrap();
    }
    for s in seeds("config") {
        parse_config(&s).unwrap();
    }
    for s in seeds("summary_csv") {
        assert_eq!(parse_summary_csv(&s).unwrap().len(), 17);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 400, ..ProptestConfig::default() })]

    #[test]
    fn instance_lines(s in mutated("instance_line")) {
        if let Ok(inst) = parse_instance_line(&s) {
            prop_assert_eq!(parse_instance_line(&instance_to_line(&inst)).unwrap(), inst);
        }
    }

    #[test]
    fn result_lines(s in mutated("result_line")) {
        if let Ok(r) = parse_result_line(&s) {
            prop_assert_eq!(parse_result_line(&result_to_line(&r)).unwrap(), r);
        }
    }

    #[test]
    fn manifests(s in mutated("manifest")) {
        if let Ok(m) = parse_manifest(&s) {
            prop_assert_eq!(parse_manifest(&manifest_to_string(&m)).unwrap(), m);
        }
    }

    #[test]
    fn configs(s in mutated("config")) {
        if let Ok(cfg) = parse_config(&s) {
            prop_assert!(cfg.validate().is_ok());
        }
    }

    #[test]
    fn summary_csvs(s in mutated("summary_csv")) {
        if let Ok(rows) = parse_summary_csv(&s) {
            let again = parse_summary_csv(&summary_csv(&rows).unwrap()).unwrap();
            prop_assert_eq!(again.len(), rows.len());
        }
    }

    #[test]
    fn arbitrary_text(s in ".{0,200}") {
        let _ = parse_instance_line(&s);
        let _ = parse_result_line(&s);
        let _ = parse_manifest(&s);
        let _ = parse_config(&s);
        let _ = parse_summary_csv(&s);
    }
}
