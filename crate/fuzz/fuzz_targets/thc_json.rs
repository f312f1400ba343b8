#![no_main]

use isothc::ThcFactorization;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(thc) = ThcFactorization::from_json(text) {
            ThcFactorization::from_json(&thc.to_json()).expect("written document parses");
        }
    }
});
