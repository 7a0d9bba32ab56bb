#![no_main]

use libfuzzer_sys::fuzz_target;
use measure_forge::experiment::parse_experiment_config;

fuzz_target!(|s: &str| {
    let Ok(config) = parse_experiment_config(s) else { return };
    assert!(config.noise.variance >= 0.0);
    // Building is cheap only for small dictionaries.
    if config.grid_sizes().iter().all(|&n| n <= 4096) {
        let _ = config.dictionary.build();
    }
});
