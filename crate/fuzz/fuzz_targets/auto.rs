#![no_main]

use libfuzzer_sys::fuzz_target;
use rnatreedit::structure::{parse_auto, PairingPolicy};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for name in ["input", "input.ct", "input.db"] {
        let _ = parse_auto(name, text, PairingPolicy::Permissive);
    }
});
