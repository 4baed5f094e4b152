//! Drivers that run one party over a reliable byte stream.
//!
//! Alice hosts the simulated source, so she is normally the listening side;
//! either side works over any `Read + Write` stream such as a TCP or Unix
//! socket.

use std::io::{self, Read, Write};
use std::time::Instant;

use crate::error::Error;
use crate::protocol::{Alice, AliceInputs, AliceOutcome, Bob, BobOutcome, Poll, Reason, SessionConfig};
use crate::transcript::{Direction, SessionClock, Transcript};
use crate::wire::{read_message, Message};

/// What each party saw, from its own side of the connection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyRun<O> {
    pub outcome: O,
    pub transcript: Transcript,
}

trait Party {
    fn poll(&mut self, now: Instant) -> Poll;
    fn receive(&mut self, msg: Message);
    fn fail(&mut self, reason: Reason);
    const OUTGOING: Direction;
}

impl Party for Alice {
    const OUTGOING: Direction = Direction::AliceToBob;

    fn poll(&mut self, now: Instant) -> Poll {
        Alice::poll(self, now)
    }
    fn receive(&mut self, msg: Message) {
        Alice::receive(self, msg)
    }
    fn fail(&mut self, reason: Reason) {
        Alice::fail(self, reason)
    }
}

impl Party for Bob {
    const OUTGOING: Direction = Direction::BobToAlice;

    fn poll(&mut self, _: Instant) -> Poll {
        Bob::poll(self)
    }
    fn receive(&mut self, msg: Message) {
        Bob::receive(self, msg)
    }
    fn fail(&mut self, reason: Reason) {
        Bob::fail(self, reason)
    }
}

fn incoming(out: Direction) -> Direction {
    match out {
        Direction::AliceToBob => Direction::BobToAlice,
        Direction::BobToAlice => Direction::AliceToBob,
    }
}

fn drive<P: Party, S: Read + Write>(party: &mut P, stream: &mut S, transcript: &mut Transcript) {
    let clock = SessionClock::start();
    loop {
        let now = Instant::now();
        match party.poll(now) {
            Poll::Send(msg) => {
                let frame = msg.to_frame();
                transcript.push(P::OUTGOING, clock.stamp(now), msg);
                if stream.write_all(&frame).and_then(|_| stream.flush()).is_err() {
                    party.fail(Reason::ConnectionLost);
                }
            }
            Poll::Receive => match read_message(stream) {
                Ok((msg, _)) => {
                    transcript.push(incoming(P::OUTGOING), clock.stamp(Instant::now()), msg.clone());
                    party.receive(msg);
                }
                Err(e) if e.kind() == io::ErrorKind::InvalidData => {
                    // Tell the peer why before giving up.
                    let abort = Message::Abort(Reason::Malformed);
                    let _ = stream.write_all(&abort.to_frame());
                    transcript.push(P::OUTGOING, clock.stamp(Instant::now()), abort);
                    party.fail(Reason::Malformed);
                }
                Err(_) => party.fail(Reason::ConnectionLost),
            },
            Poll::Sleep(d) => std::thread::sleep(d),
            Poll::Done => break,
        }
    }
}

pub fn run_alice<S: Read + Write>(
    stream: &mut S,
    cfg: &SessionConfig,
    inputs: AliceInputs,
) -> Result<PartyRun<AliceOutcome>, Error> {
    let mut transcript = Transcript::new(cfg.session, cfg.digest());
    let mut alice = Alice::new(cfg.clone(), inputs)?;
    drive(&mut alice, stream, &mut transcript);
    Ok(PartyRun {
        outcome: alice.into_outcome().expect("driver runs to completion"),
        transcript,
    })
}

pub fn run_bob<S: Read + Write>(stream: &mut S, cfg: &SessionConfig, seed: u64) -> Result<PartyRun<BobOutcome>, Error> {
    let mut transcript = Transcript::new(cfg.session, cfg.digest());
    let mut bob = Bob::new(cfg.clone(), seed)?;
    drive(&mut bob, stream, &mut transcript);
    Ok(PartyRun {
        outcome: bob.outcome().expect("driver runs to completion"),
        transcript,
    })
}
