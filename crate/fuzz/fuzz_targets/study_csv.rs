#![no_main]

use libfuzzer_sys::fuzz_target;
use spoofcal_cli::commands::read_study_csv;

fuzz_target!(|data: &[u8]| {
    let _ = read_study_csv(data);
});
