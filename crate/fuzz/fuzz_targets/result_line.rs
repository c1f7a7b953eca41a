#![no_main]

use hexcover::io::{parse_result_line, result_to_line};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(rec) = parse_result_line(data) {
        assert_eq!(parse_result_line(&result_to_line(&rec)).expect("round trip"), rec);
    }
});
