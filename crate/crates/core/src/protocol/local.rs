use std::time::Instant;

use super::{Alice, AliceInputs, AliceOutcome, Bob, BobOutcome, Poll, Reason, SessionConfig};
use crate::error::Error;
use crate::transcript::{Direction, SessionClock, Transcript};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalRun {
    pub alice: AliceOutcome,
    pub bob: BobOutcome,
    pub transcript: Option<Transcript>,
}

/// Runs both parties in one thread, passing messages directly.
///
/// The wait gate is honoured with real sleeps, so a nonzero `delta_t`
/// slows the run down accordingly.
pub fn run_local(cfg: &SessionConfig, alice: AliceInputs, bob_seed: u64, record: bool) -> Result<LocalRun, Error> {
    run_pair(cfg.clone(), cfg.clone(), alice, bob_seed, record)
}

/// As [`run_local`] but with separate configurations, to exercise parameter
/// mismatches.
pub fn run_pair(
    alice_cfg: SessionConfig,
    bob_cfg: SessionConfig,
    inputs: AliceInputs,
    bob_seed: u64,
    record: bool,
) -> Result<LocalRun, Error> {
    let clock = SessionClock::start();
    let mut transcript = record.then(|| Transcript::new(alice_cfg.session, alice_cfg.digest()));
    let mut alice = Alice::new(alice_cfg, inputs)?;
    let mut bob = Bob::new(bob_cfg, bob_seed)?;
    loop {
        let now = Instant::now();
        let a = alice.poll(now);
        if let Poll::Send(m) = a {
            if let Some(t) = transcript.as_mut() {
                t.push(Direction::AliceToBob, clock.stamp(now), m.clone());
            }
            bob.receive(m);
            continue;
        }
        match (a, bob.poll()) {
            (Poll::Send(_), _) | (_, Poll::Sleep(_)) => unreachable!("handled above or never produced"),
            (_, Poll::Send(m)) => {
                if let Some(t) = transcript.as_mut() {
                    t.push(Direction::BobToAlice, clock.stamp(now), m.clone());
                }
                alice.receive(m);
            }
            (Poll::Sleep(d), _) => std::thread::sleep(d),
            (Poll::Done, Poll::Done) => break,
            (Poll::Done, Poll::Receive) => bob.fail(Reason::ConnectionLost),
            (Poll::Receive, Poll::Done) => alice.fail(Reason::ConnectionLost),
            (Poll::Receive, Poll::Receive) => {
                alice.fail(Reason::ProtocolViolation);
                bob.fail(Reason::ProtocolViolation);
            }
        }
    }
    Ok(LocalRun {
        alice: alice.into_outcome().expect("Alice finished"),
        bob: bob.outcome().expect("Bob finished"),
        transcript,
    })
}
