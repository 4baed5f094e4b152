#![no_main]

use bcns::symmetrize::{solve_keep_probabilities, DetectorCounts};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(counts) = DetectorCounts::parse(text) {
        if let Ok(keep) = solve_keep_probabilities(&counts) {
            for t in keep.t.iter().flatten() {
                assert!((0.0..=1.0).contains(t));
            }
        }
    }
});
