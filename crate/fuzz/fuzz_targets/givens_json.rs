#![no_main]

use isothc::focksim::GivensSequence;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(seq) = GivensSequence::from_json(text) {
            if seq.n_modes <= 64 {
                let _ = seq.single_particle_matrix();
            }
        }
    }
});
