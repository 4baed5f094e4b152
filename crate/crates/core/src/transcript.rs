//! Append-only session transcripts.
//!
//! File layout: magic `BCNS1`, a version byte, the session id (`u64` BE) and
//! the 32-byte parameter digest, then one record per message: direction
//! (`0` Alice to Bob, `1` Bob to Alice), a `u64` BE timestamp in nanoseconds
//! since the Unix epoch, and the wire frame.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use thiserror::Error;

use crate::protocol::{Bob, BobOutcome, Poll, Reason, SessionConfig};
use crate::wire::{Message, WireError, DIGEST_LEN};

pub const MAGIC: &[u8; 5] = b"BCNS1";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 5 + 1 + 8 + DIGEST_LEN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    AliceToBob = 0,
    BobToAlice = 1,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub direction: Direction,
    pub timestamp_ns: u64,
    pub message: Message,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub session: u64,
    pub digest: [u8; DIGEST_LEN],
    pub records: Vec<Record>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranscriptError {
    #[error("not a transcript (bad magic)")]
    Magic,
    #[error("unsupported transcript version {0}")]
    Version(u8),
    #[error("truncated at byte {0}")]
    Truncated(usize),
    #[error("bad direction byte {byte} at offset {offset}")]
    Direction { offset: usize, byte: u8 },
    #[error("bad frame at offset {offset}: {source}")]
    Frame { offset: usize, source: WireError },
    #[error("parameter digest does not match the session configuration")]
    Digest,
    #[error("replayed message {index} differs from the recorded one")]
    Divergence { index: usize },
    #[error("transcript ends before the session finishes")]
    Incomplete,
}

impl Transcript {
    pub fn new(session: u64, digest: [u8; DIGEST_LEN]) -> Self {
        Self {
            session,
            digest,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, direction: Direction, timestamp_ns: u64, message: Message) {
        self.records.push(Record {
            direction,
            timestamp_ns,
            message,
        });
    }

    pub fn messages(&self, direction: Direction) -> impl Iterator<Item = &Message> {
        self.records
            .iter()
            .filter(move |r| r.direction == direction)
            .map(|r| &r.message)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN);
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&self.session.to_be_bytes());
        out.extend_from_slice(&self.digest);
        for r in &self.records {
            out.push(r.direction as u8);
            out.extend_from_slice(&r.timestamp_ns.to_be_bytes());
            out.extend_from_slice(&r.message.to_frame());
        }
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self, TranscriptError> {
        if buf.len() < MAGIC.len() || &buf[..MAGIC.len()] != MAGIC {
            return Err(TranscriptError::Magic);
        }
        if buf.len() < HEADER_LEN {
            return Err(TranscriptError::Truncated(buf.len()));
        }
        if buf[5] != VERSION {
            return Err(TranscriptError::Version(buf[5]));
        }
        let session = u64::from_be_bytes(buf[6..14].try_into().unwrap());
        let digest = buf[14..HEADER_LEN].try_into().unwrap();
        let mut t = Transcript::new(session, digest);
        let mut pos = HEADER_LEN;
        while pos < buf.len() {
            if buf.len() - pos < 9 {
                return Err(TranscriptError::Truncated(buf.len()));
            }
            let direction = match buf[pos] {
                0 => Direction::AliceToBob,
                1 => Direction::BobToAlice,
                byte => return Err(TranscriptError::Direction { offset: pos, byte }),
            };
            let timestamp_ns = u64::from_be_bytes(buf[pos + 1..pos + 9].try_into().unwrap());
            let (message, used) = Message::from_frame(&buf[pos + 9..]).map_err(|source| TranscriptError::Frame {
                offset: pos + 9,
                source,
            })?;
            t.push(direction, timestamp_ns, message);
            pos += 9 + used;
        }
        Ok(t)
    }
}

/// Maps monotonic instants onto wall-clock nanoseconds, anchored once per
/// session so recorded gaps match the gaps the parties observed.
#[derive(Debug, Clone, Copy)]
pub struct SessionClock {
    start: Instant,
    start_ns: u64,
}

impl SessionClock {
    pub fn start() -> Self {
        let start_ns = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_nanos() as u64);
        Self {
            start: Instant::now(),
            start_ns,
        }
    }

    pub fn stamp(&self, at: Instant) -> u64 {
        self.start_ns + at.saturating_duration_since(self.start).as_nanos() as u64
    }
}

/// Re-runs Bob from his seed against the recorded Alice messages and checks
/// that every message he sends matches the transcript.
pub fn replay_bob(cfg: &SessionConfig, bob_seed: u64, t: &Transcript) -> Result<BobOutcome, TranscriptError> {
    if t.digest != cfg.digest() || t.session != cfg.session {
        return Err(TranscriptError::Digest);
    }
    let mut bob = Bob::new(cfg.clone(), bob_seed).map_err(|_| TranscriptError::Digest)?;
    let mut from_alice = t.messages(Direction::AliceToBob);
    let recorded: Vec<&Message> = t.messages(Direction::BobToAlice).collect();
    let mut sent = 0;
    loop {
        match bob.poll() {
            Poll::Send(m) => {
                if recorded.get(sent) != Some(&&m) {
                    return Err(TranscriptError::Divergence { index: sent });
                }
                sent += 1;
            }
            Poll::Receive => match from_alice.next() {
                Some(m) => bob.receive(m.clone()),
                None => bob.fail(Reason::ConnectionLost),
            },
            Poll::Sleep(_) => unreachable!("Bob never waits"),
            Poll::Done => break,
        }
    }
    if sent != recorded.len() {
        return Err(TranscriptError::Divergence { index: sent });
    }
    bob.outcome().ok_or(TranscriptError::Incomplete)
}
