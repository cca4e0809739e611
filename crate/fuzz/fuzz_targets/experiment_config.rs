#![no_main]

use libfuzzer_sys::fuzz_target;
use spoofcal_cli::config::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let _ = ExperimentConfig::from_json(data);
});
