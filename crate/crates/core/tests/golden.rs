//! Fixtures written by `golden/encode.py`, an encoder that shares no code
//! with the crate.

use bcns::protocol::Reason;
use bcns::transcript::{Direction, Transcript};
use bcns::wire::{decode_stream, Message};
use bcns::BitString;

fn bits(len: usize, f: impl Fn(usize) -> bool) -> BitString {
    BitString::from_bits((0..len).map(f))
}

fn expected_frames() -> Vec<Message> {
    let mut digest = [0u8; 32];
    for (i, b) in digest.iter_mut().enumerate() {
        *b = i as u8;
    }
    vec![
        Message::Hello {
            session: 0x0102030405060708,
            digest,
        },
        Message::ChannelBatch {
            x: bits(13, |i| i % 3 == 0),
            theta: bits(13, |i| i % 2 == 1),
            click: bits(13, |i| i < 5),
            flip: bits(13, |i| i == 7),
        },
        Message::Missing(vec![3, 70000, u32::MAX]),
        Message::Basis(BitString::zeros(0)),
        Message::Syndrome(bits(17, |i| i % 5 == 0)),
        Message::Seed(bits(64, |_| true)),
        Message::Mask(bits(1, |_| true)),
        Message::Open(bits(9, |i| i % 2 == 0)),
        Message::Verdict {
            accepted: true,
            reason: Reason::Ok,
            opened: bits(1, |_| true),
        },
        Message::Abort(Reason::ConnectionLost),
        Message::Truncation(vec![]),
        Message::Verdict {
            accepted: false,
            reason: Reason::ErrorCountOutOfInterval,
            opened: BitString::zeros(0),
        },
    ]
}

#[test]
fn frames_match_independent_encoder() {
    let bytes = include_bytes!("golden/frames.bin");
    let expected = expected_frames();
    assert_eq!(decode_stream(bytes).unwrap(), expected);
    let encoded: Vec<u8> = expected.iter().flat_map(Message::to_frame).collect();
    assert_eq!(encoded, bytes);
}

#[test]
fn transcript_matches_independent_encoder() {
    let bytes = include_bytes!("golden/transcript.bin");
    let digest = [0xAB; 32];
    let mut t = Transcript::new(42, digest);
    t.push(Direction::BobToAlice, 0, Message::Hello { session: 42, digest });
    t.push(Direction::AliceToBob, 2_000_000_123, Message::Mask(bits(1, |_| true)));
    t.push(
        Direction::BobToAlice,
        2_500_000_000,
        Message::Verdict {
            accepted: true,
            reason: Reason::Ok,
            opened: bits(1, |_| false),
        },
    );
    assert_eq!(Transcript::from_bytes(bytes).unwrap(), t);
    assert_eq!(t.to_bytes(), bytes);
}
