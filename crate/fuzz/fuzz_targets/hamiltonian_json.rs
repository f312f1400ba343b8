#![no_main]

use isothc::ElectronicHamiltonian;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(ham) = ElectronicHamiltonian::from_json(text) {
            ElectronicHamiltonian::from_json(&ham.to_json()).expect("written document parses");
        }
    }
});
