#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spectrum) = kwm::io::parse_spectrum(text) {
            let again = kwm::io::spectrum_to_value(&spectrum).to_string();
            kwm::io::parse_spectrum(&again).expect("spectrum output reparses");
        }
    }
});
