#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    let _ = measure_forge::io::parse_certificates_json(s);
});
