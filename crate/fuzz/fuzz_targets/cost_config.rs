#![no_main]

use libfuzzer_sys::fuzz_target;
use rnatreedit::model::ModelConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ModelConfig::parse(text) {
        let _ = cfg.build();
    }
});
