#![no_main]

use isothc_cli::fit::{fit_loglog, parse_series};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(points) = parse_series(text, None, None) {
            let _ = fit_loglog(&points, 3);
        }
        let _ = parse_series(text, Some("tau"), Some("error"));
    }
});
