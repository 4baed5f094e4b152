#![no_main]

use bcns::transcript::Transcript;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = Transcript::from_bytes(data) {
        let bytes = t.to_bytes();
        assert_eq!(Transcript::from_bytes(&bytes).expect("re-encoded transcript decodes"), t);
    }
});
