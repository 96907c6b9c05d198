#![no_main]

use libfuzzer_sys::fuzz_target;
use rnatreedit::structure::{parse_ct, PairingPolicy};
use rnatreedit::tree::{build, Representation};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = parse_ct(text, PairingPolicy::Permissive) {
        let again = parse_ct(&s.to_ct(), PairingPolicy::Permissive).expect("written record parses");
        assert_eq!(again, s);
        for rep in [
            Representation::RepB,
            Representation::RepC,
            Representation::RepD,
            Representation::RepE,
        ] {
            let _ = build(&s, rep);
        }
    }
});
