//! Byte-exact framing for the classical messages.
//!
//! A frame is a `u32` big-endian payload length, a `u8` type and the
//! payload. Bit strings inside payloads are a `u32` big-endian bit count
//! followed by LSB-first packed bytes; index lists are a `u32` count followed
//! by `u32` big-endian indices.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::bits::BitString;
use crate::protocol::Reason;

/// Frames larger than this are rejected before allocation.
pub const MAX_PAYLOAD: usize = 1 << 30;

pub const DIGEST_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageType {
    Hello = 0x01,
    ChannelBatch = 0x02,
    Missing = 0x03,
    Basis = 0x04,
    Syndrome = 0x05,
    Seed = 0x06,
    Mask = 0x07,
    Open = 0x08,
    Verdict = 0x09,
    Abort = 0x0A,
    Truncation = 0x0B,
}

impl MessageType {
    pub fn from_u8(b: u8) -> Option<Self> {
        use MessageType::*;
        Some(match b {
            0x01 => Hello,
            0x02 => ChannelBatch,
            0x03 => Missing,
            0x04 => Basis,
            0x05 => Syndrome,
            0x06 => Seed,
            0x07 => Mask,
            0x08 => Open,
            0x09 => Verdict,
            0x0A => Abort,
            0x0B => Truncation,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Hello { session: u64, digest: [u8; DIGEST_LEN] },
    /// Simulated source output for a run of rounds: Alice's bit and basis,
    /// whether Bob's detector fires and whether noise flips the bit.
    ChannelBatch {
        x: BitString,
        theta: BitString,
        click: BitString,
        flip: BitString,
    },
    Missing(Vec<u32>),
    Basis(BitString),
    Syndrome(BitString),
    Seed(BitString),
    Mask(BitString),
    Open(BitString),
    Verdict {
        accepted: bool,
        reason: Reason,
        opened: BitString,
    },
    Abort(Reason),
    Truncation(Vec<u32>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WireError {
    #[error("frame truncated: need {needed} bytes, have {have}")]
    Short { needed: usize, have: usize },
    #[error("unknown message type 0x{0:02x}")]
    UnknownType(u8),
    #[error("payload of {0} bytes exceeds the frame limit")]
    TooLarge(usize),
    #[error("bit count {bits} exceeds remaining payload of {bytes} bytes")]
    BitCount { bits: u32, bytes: usize },
    #[error("nonzero padding bits")]
    Padding,
    #[error("{0} trailing payload bytes")]
    Trailing(usize),
    #[error("unknown reason code {0}")]
    UnknownReason(u8),
    #[error("invalid field: {0}")]
    Field(&'static str),
}

impl Message {
    pub fn kind(&self) -> MessageType {
        match self {
            Message::Hello { .. } => MessageType::Hello,
            Message::ChannelBatch { .. } => MessageType::ChannelBatch,
            Message::Missing(_) => MessageType::Missing,
            Message::Basis(_) => MessageType::Basis,
            Message::Syndrome(_) => MessageType::Syndrome,
            Message::Seed(_) => MessageType::Seed,
            Message::Mask(_) => MessageType::Mask,
            Message::Open(_) => MessageType::Open,
            Message::Verdict { .. } => MessageType::Verdict,
            Message::Abort(_) => MessageType::Abort,
            Message::Truncation(_) => MessageType::Truncation,
        }
    }

    pub fn payload(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            Message::Hello { session, digest } => {
                out.extend_from_slice(&session.to_be_bytes());
                out.extend_from_slice(digest);
            }
            Message::ChannelBatch { x, theta, click, flip } => {
                for b in [x, theta, click, flip] {
                    put_bits(&mut out, b);
                }
            }
            Message::Missing(idx) | Message::Truncation(idx) => put_indices(&mut out, idx),
            Message::Basis(b) | Message::Syndrome(b) | Message::Seed(b) | Message::Mask(b) | Message::Open(b) => {
                put_bits(&mut out, b)
            }
            Message::Verdict { accepted, reason, opened } => {
                out.push(*accepted as u8);
                out.push(*reason as u8);
                put_bits(&mut out, opened);
            }
            Message::Abort(reason) => out.push(*reason as u8),
        }
        out
    }

    pub fn to_frame(&self) -> Vec<u8> {
        let payload = self.payload();
        let mut out = Vec::with_capacity(5 + payload.len());
        out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
        out.push(self.kind() as u8);
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_payload(kind: u8, payload: &[u8]) -> Result<Message, WireError> {
        let kind = MessageType::from_u8(kind).ok_or(WireError::UnknownType(kind))?;
        let mut r = Reader { buf: payload };
        let msg = match kind {
            MessageType::Hello => Message::Hello {
                session: u64::from_be_bytes(r.array()?),
                digest: r.array()?,
            },
            MessageType::ChannelBatch => {
                let x = r.bits()?;
                let theta = r.bits()?;
                let click = r.bits()?;
                let flip = r.bits()?;
                if [theta.len(), click.len(), flip.len()].iter().any(|&l| l != x.len()) {
                    return Err(WireError::Field("channel batch columns differ in length"));
                }
                Message::ChannelBatch { x, theta, click, flip }
            }
            MessageType::Missing => Message::Missing(r.indices()?),
            MessageType::Truncation => Message::Truncation(r.indices()?),
            MessageType::Basis => Message::Basis(r.bits()?),
            MessageType::Syndrome => Message::Syndrome(r.bits()?),
            MessageType::Seed => Message::Seed(r.bits()?),
            MessageType::Mask => Message::Mask(r.bits()?),
            MessageType::Open => Message::Open(r.bits()?),
            MessageType::Verdict => {
                let accepted = match r.byte()? {
                    0 => false,
                    1 => true,
                    _ => return Err(WireError::Field("verdict flag must be 0 or 1")),
                };
                let reason = r.reason()?;
                Message::Verdict {
                    accepted,
                    reason,
                    opened: r.bits()?,
                }
            }
            MessageType::Abort => Message::Abort(r.reason()?),
        };
        if !r.buf.is_empty() {
            return Err(WireError::Trailing(r.buf.len()));
        }
        Ok(msg)
    }

    /// Decodes one frame from the front of `buf`, returning the message and
    /// the number of bytes consumed.
    pub fn from_frame(buf: &[u8]) -> Result<(Message, usize), WireError> {
        if buf.len() < 5 {
            return Err(WireError::Short { needed: 5, have: buf.len() });
        }
        let len = u32::from_be_bytes(buf[..4].try_into().unwrap()) as usize;
        if len > MAX_PAYLOAD {
            return Err(WireError::TooLarge(len));
        }
        let end = 5 + len;
        if buf.len() < end {
            return Err(WireError::Short { needed: end, have: buf.len() });
        }
        Ok((Message::from_payload(buf[4], &buf[5..end])?, end))
    }
}

/// Splits a byte stream into messages. On failure the error carries the
/// offset of the offending frame.
pub fn decode_stream(mut buf: &[u8]) -> Result<Vec<Message>, (usize, WireError)> {
    let mut out = Vec::new();
    let mut offset = 0;
    while !buf.is_empty() {
        let (msg, used) = Message::from_frame(buf).map_err(|e| (offset, e))?;
        out.push(msg);
        offset += used;
        buf = &buf[used..];
    }
    Ok(out)
}

pub fn write_message<W: Write>(w: &mut W, msg: &Message) -> io::Result<()> {
    w.write_all(&msg.to_frame())?;
    w.flush()
}

/// Reads one frame. Returns the raw frame bytes alongside the message so
/// callers can record them verbatim.
pub fn read_message<R: Read>(r: &mut R) -> io::Result<(Message, Vec<u8>)> {
    let mut head = [0u8; 5];
    r.read_exact(&mut head)?;
    let len = u32::from_be_bytes(head[..4].try_into().unwrap()) as usize;
    if len > MAX_PAYLOAD {
        return Err(io::Error::new(io::ErrorKind::InvalidData, WireError::TooLarge(len)));
    }
    let mut frame = Vec::with_capacity(5 + len);
    frame.extend_from_slice(&head);
    frame.resize(5 + len, 0);
    r.read_exact(&mut frame[5..])?;
    let msg = Message::from_payload(head[4], &frame[5..]).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    Ok((msg, frame))
}

fn put_bits(out: &mut Vec<u8>, b: &BitString) {
    out.extend_from_slice(&(b.len() as u32).to_be_bytes());
    out.extend_from_slice(&b.to_bytes());
}

fn put_indices(out: &mut Vec<u8>, idx: &[u32]) {
    out.extend_from_slice(&(idx.len() as u32).to_be_bytes());
    out.reserve(4 * idx.len());
    for i in idx {
        out.extend_from_slice(&i.to_be_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.buf.len() < n {
            return Err(WireError::Short {
                needed: n,
                have: self.buf.len(),
            });
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], WireError> {
        Ok(self.take(N)?.try_into().unwrap())
    }

    fn byte(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_be_bytes(self.array()?))
    }

    fn bits(&mut self) -> Result<BitString, WireError> {
        let bits = self.u32()?;
        let need = (bits as usize).div_ceil(8);
        if need > self.buf.len() {
            return Err(WireError::BitCount {
                bits,
                bytes: self.buf.len(),
            });
        }
        BitString::from_bytes(bits as usize, self.take(need)?).map_err(|_| WireError::Padding)
    }

    fn indices(&mut self) -> Result<Vec<u32>, WireError> {
        let count = self.u32()? as usize;
        if count.checked_mul(4).is_none_or(|b| b > self.buf.len()) {
            return Err(WireError::Short {
                needed: count.saturating_mul(4),
                have: self.buf.len(),
            });
        }
        (0..count).map(|_| self.u32()).collect()
    }

    fn reason(&mut self) -> Result<Reason, WireError> {
        let b = self.byte()?;
        Reason::from_u8(b).ok_or(WireError::UnknownReason(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_missing_is_nine_bytes() {
        let f = Message::Missing(vec![]).to_frame();
        assert_eq!(f, vec![0, 0, 0, 4, 0x03, 0, 0, 0, 0]);
    }

    #[test]
    fn basis_payload_size() {
        let m = Message::Basis(BitString::zeros(250_000));
        assert_eq!(m.payload().len(), 4 + 31_250);
    }

    #[test]
    fn golden_frames() {
        let bits = BitString::from_bits([true, false, true, true, false, false, false, false, true]);
        assert_eq!(
            Message::Mask(bits).to_frame(),
            vec![0, 0, 0, 6, 0x07, 0, 0, 0, 9, 0b0000_1101, 0b0000_0001]
        );
        assert_eq!(Message::Abort(Reason::TooFewBits).to_frame(), vec![0, 0, 0, 1, 0x0A, 3]);
        assert_eq!(
            Message::Truncation(vec![1, 258]).to_frame(),
            vec![0, 0, 0, 12, 0x0B, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 1, 2]
        );
    }

    #[test]
    fn malformed_frames_are_errors() {
        assert_eq!(Message::from_frame(&[0, 0]), Err(WireError::Short { needed: 5, have: 2 }));
        assert_eq!(Message::from_frame(&[0, 0, 0, 0, 0x0C]), Err(WireError::UnknownType(0x0C)));
        assert_eq!(
            Message::from_frame(&[0, 0, 0, 5, 0x04, 0, 0, 1, 0, 0]),
            Err(WireError::BitCount { bits: 256, bytes: 1 })
        );
        assert_eq!(Message::from_frame(&[0, 0, 0, 5, 0x04, 0, 0, 0, 3, 0xFF]), Err(WireError::Padding));
        assert_eq!(Message::from_frame(&[0, 0, 0, 2, 0x0A, 0, 0]), Err(WireError::Trailing(1)));
        assert_eq!(Message::from_frame(&[0, 0, 0, 1, 0x0A, 200]), Err(WireError::UnknownReason(200)));
        assert_eq!(
            Message::from_frame(&[0, 0, 0, 4, 0x03, 0xFF, 0xFF, 0xFF, 0xFF]),
            Err(WireError::Short {
                needed: 0xFFFF_FFFF * 4,
                have: 0
            })
        );
    }

    #[test]
    fn stream_reports_offset() {
        let mut buf = Message::Abort(Reason::Ok).to_frame();
        let first = buf.len();
        buf.extend_from_slice(&[0, 0, 0, 9, 0x05]);
        let (offset, _) = decode_stream(&buf).unwrap_err();
        assert_eq!(offset, first);
    }

    fn bits() -> impl Strategy<Value = BitString> {
        proptest::collection::vec(any::<bool>(), 0..200).prop_map(BitString::from_bits)
    }

    fn message() -> impl Strategy<Value = Message> {
        let reason = proptest::sample::select(Reason::ALL.to_vec());
        prop_oneof![
            (any::<u64>(), any::<[u8; 32]>()).prop_map(|(session, digest)| Message::Hello { session, digest }),
            (0usize..150, any::<u64>()).prop_map(|(len, s)| {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(s);
                let mut col = || BitString::random(len, &mut rng);
                Message::ChannelBatch {
                    x: col(),
                    theta: col(),
                    click: col(),
                    flip: col(),
                }
            }),
            proptest::collection::vec(any::<u32>(), 0..50).prop_map(Message::Missing),
            proptest::collection::vec(any::<u32>(), 0..50).prop_map(Message::Truncation),
            bits().prop_map(Message::Basis),
            bits().prop_map(Message::Syndrome),
            bits().prop_map(Message::Seed),
            bits().prop_map(Message::Mask),
            bits().prop_map(Message::Open),
            (any::<bool>(), reason.clone(), bits()).prop_map(|(accepted, reason, opened)| Message::Verdict {
                accepted,
                reason,
                opened
            }),
            reason.prop_map(Message::Abort),
        ]
    }

    proptest! {
        #[test]
        fn frame_round_trip(m in message()) {
            let frame = m.to_frame();
            let (back, used) = Message::from_frame(&frame).unwrap();
            prop_assert_eq!(used, frame.len());
            prop_assert_eq!(back, m);
        }

        #[test]
        fn arbitrary_bytes_never_panic(buf in proptest::collection::vec(any::<u8>(), 0..64)) {
            let _ = decode_stream(&buf);
        }
    }
}
