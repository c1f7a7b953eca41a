#![no_main]

use hexcover::io::{manifest_to_string, parse_manifest};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(m) = parse_manifest(data) {
        assert_eq!(parse_manifest(&manifest_to_string(&m)).expect("round trip"), m);
    }
});
