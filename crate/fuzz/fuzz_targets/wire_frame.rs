#![no_main]

use bcns::wire::{decode_stream, Message};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((msg, used)) = Message::from_frame(data) {
        // Canonical frames re-encode byte for byte.
        let again = msg.to_frame();
        let (back, n) = Message::from_frame(&again).expect("re-encoded frame decodes");
        assert_eq!(back, msg);
        assert_eq!(n, again.len());
        assert!(used <= data.len());
    }
    let _ = decode_stream(data);
});
