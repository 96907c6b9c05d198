#![no_main]

use libfuzzer_sys::fuzz_target;
use rnatreedit::structure::{parse_dotbracket, PairingPolicy};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for policy in [PairingPolicy::Permissive, PairingPolicy::Strict] {
        if let Ok(s) = parse_dotbracket(text, policy) {
            let again = parse_dotbracket(&s.to_dotbracket(), policy).expect("written record parses");
            assert_eq!(again, s);
        }
    }
});
