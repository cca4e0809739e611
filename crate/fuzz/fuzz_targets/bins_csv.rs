#![no_main]

use libfuzzer_sys::fuzz_target;
use spoofcal::metrics::read_bins_csv;

fuzz_target!(|data: &[u8]| {
    let _ = read_bins_csv(data);
});
