#![no_main]

use libfuzzer_sys::fuzz_target;
use spoofcal::store::DatasetManifest;

fuzz_target!(|data: &[u8]| {
    if let Ok(manifest) = DatasetManifest::from_json(data) {
        let again = DatasetManifest::from_json(&manifest.to_json().unwrap()).unwrap();
        assert_eq!(again, manifest);
    }
});
