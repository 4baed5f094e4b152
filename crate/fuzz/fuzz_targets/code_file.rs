#![no_main]

use bcns::codes::LinearCode;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(code) = LinearCode::from_bytes(data) {
        let bytes = code.to_bytes();
        assert!(LinearCode::from_bytes(&bytes).expect("re-encoded code decodes") == code);
    }
});
