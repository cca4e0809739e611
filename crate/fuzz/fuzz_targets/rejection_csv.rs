#![no_main]

use libfuzzer_sys::fuzz_target;
use spoofcal::selective::RejectionCurve;

fuzz_target!(|data: &[u8]| {
    let _ = RejectionCurve::read_csv(data);
});
