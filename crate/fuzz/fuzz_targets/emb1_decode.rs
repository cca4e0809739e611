#![no_main]

use libfuzzer_sys::fuzz_target;
use spoofcal::store::emb1;

fuzz_target!(|data: &[u8]| {
    if let Ok(matrix) = emb1::decode(data) {
        // anything accepted re-encodes to the same bytes
        assert_eq!(emb1::encode(&matrix).unwrap(), data);
    }
});
