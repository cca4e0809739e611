#![no_main]

use libfuzzer_sys::fuzz_target;
use spoofcal::selective::read_scores_csv;

fuzz_target!(|data: &[u8]| {
    let _ = read_scores_csv(data);
});
