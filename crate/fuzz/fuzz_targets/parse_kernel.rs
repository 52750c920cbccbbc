#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(kernel) = kwm::io::parse_kernel(text) {
            // whatever parses must serialize and parse back
            let again = kwm::io::kernel_to_value(&kernel).to_string();
            kwm::io::parse_kernel(&again).expect("kernel output reparses");
        }
    }
});
