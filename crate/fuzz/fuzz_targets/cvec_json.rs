#![no_main]

use libfuzzer_sys::fuzz_target;
use measure_forge::cvec::parse_cvec_json;

fuzz_target!(|s: &str| {
    if let Ok(v) = parse_cvec_json(s) {
        assert!(v.is_finite());
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(parse_cvec_json(&text).unwrap(), v);
    }
});
