#![no_main]

use bcns::photon::{parse_stream_csv, write_stream_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(events) = parse_stream_csv(text) {
        let with_origin = events.iter().any(|e| e.origin.is_some());
        let once = write_stream_csv(&events, with_origin);
        let again = parse_stream_csv(&once).expect("written stream parses");
        assert_eq!(write_stream_csv(&again, with_origin), once);
    }
});
