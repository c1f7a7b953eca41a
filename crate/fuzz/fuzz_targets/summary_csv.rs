#![no_main]

use hexcover::report::{parse_summary_csv, summary_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(rows) = parse_summary_csv(data) {
        let text = summary_csv(&rows).expect("rows serialize");
        let again = parse_summary_csv(&text).expect("round trip");
        assert_eq!(again.len(), rows.len());
    }
});
