#![no_main]

use hexcover::io::parse_config;
use libfuzzer_sys::fuzz_target;

// Accepted configs must stay valid.
fuzz_target!(|data: &str| {
    if let Ok(cfg) = parse_config(data) {
        cfg.validate().expect("parse_config validates");
    }
});
