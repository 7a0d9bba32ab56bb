#![no_main]

use libfuzzer_sys::fuzz_target;
use measure_forge::io::{parse_trace_csv, trace_csv_string};

fuzz_target!(|s: &str| {
    if let Ok(rows) = parse_trace_csv(s) {
        let text = trace_csv_string(&rows).unwrap();
        assert_eq!(parse_trace_csv(&text).unwrap().len(), rows.len());
    }
});
