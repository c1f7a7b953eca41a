#![no_main]

use hexcover::io::{instance_to_line, parse_instance_line};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    // Anything that parses must re-serialize to a line that parses back to
    // the same instance.
    if let Ok(inst) = parse_instance_line(data) {
        let line = instance_to_line(&inst);
        let again = parse_instance_line(&line).expect("serialized instances parse");
        assert_eq!(again, inst);
    }
});
