#![no_main]

use isothc::thc::ThcFactorFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(file) = ThcFactorFile::parse(text) {
            ThcFactorFile::parse(&file.to_json()).expect("written document parses");
        }
    }
});
