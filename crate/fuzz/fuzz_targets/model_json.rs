#![no_main]

use libfuzzer_sys::fuzz_target;
use spoofcal::classifier::Model;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = Model::from_json(data) {
        let again = Model::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(again, model);
    }
});
