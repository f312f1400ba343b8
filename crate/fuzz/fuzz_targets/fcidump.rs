#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(ham) = isothc::hamiltonian::parse_fcidump(text) {
            let again =
                isothc::hamiltonian::parse_fcidump(&ham.to_fcidump()).expect("written dump parses");
            assert_eq!(again.n_orbitals(), ham.n_orbitals());
        }
    }
});
