#![no_main]

use bcns::config::{KvConfig, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(kv) = KvConfig::parse(text) {
        let rendered = kv.render();
        assert_eq!(KvConfig::parse(&rendered).expect("rendered config parses"), kv);
        let mut cfg = RunConfig::default();
        let _ = cfg.apply(&kv);
    }
});
