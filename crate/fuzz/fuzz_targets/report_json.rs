#![no_main]

use libfuzzer_sys::fuzz_target;
use rnatreedit::report::verify_report;

fuzz_target!(|data: &[u8]| {
    // Reports carry trees that get re-compared; keep them small.
    if data.len() > 2048 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = verify_report(text);
});
