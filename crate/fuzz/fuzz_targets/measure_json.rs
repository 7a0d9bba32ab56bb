#![no_main]

use libfuzzer_sys::fuzz_target;
use measure_forge::measure::parse_measure_json;

fuzz_target!(|s: &str| {
    if let Ok(x) = parse_measure_json(s) {
        // canonical form survives a round trip
        let text = serde_json::to_string(&x).unwrap();
        assert_eq!(parse_measure_json(&text).unwrap(), x);
    }
});
