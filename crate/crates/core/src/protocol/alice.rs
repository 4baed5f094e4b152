use std::collections::VecDeque;
use std::time::Instant;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{bc_commit, cheating_alice_open, AliceInputs, AliceOutcome, Poll, Reason, SessionConfig, Verdict};
use crate::bits::BitString;
use crate::error::Error;
use crate::wire::Message;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    AwaitHello,
    Batches,
    AwaitMissing,
    /// Truncation sent; the basis goes out once the wait has elapsed.
    Waiting,
    AwaitVerdict,
    Done,
}

/// Honest (or bit-flipping) committer hosting the simulated source.
pub struct Alice {
    cfg: SessionConfig,
    inputs: AliceInputs,
    rng: ChaCha20Rng,
    channel_rng: ChaCha20Rng,
    phase: Phase,
    outbox: VecDeque<Message>,
    next_round: usize,
    x: BitString,
    theta: BitString,
    kept: Vec<usize>,
    last_batch: Option<Instant>,
    outcome: Option<AliceOutcome>,
    commitment: Option<super::Commitment>,
}

impl Alice {
    pub fn new(cfg: SessionConfig, inputs: AliceInputs) -> Result<Self, Error> {
        cfg.validate()?;
        if inputs.commit.len() != cfg.l {
            return Err(Error::LengthMismatch {
                expected: cfg.l,
                actual: inputs.commit.len(),
            });
        }
        if let Some(&bad) = inputs.flips.iter().find(|&&i| i >= cfg.params.n) {
            return Err(Error::Domain(format!("flip position {bad} outside the block")));
        }
        let rng = ChaCha20Rng::seed_from_u64(inputs.seed);
        let channel_rng = ChaCha20Rng::seed_from_u64(inputs.channel_seed);
        Ok(Self {
            cfg,
            inputs,
            rng,
            channel_rng,
            phase: Phase::AwaitHello,
            outbox: VecDeque::new(),
            next_round: 0,
            x: BitString::zeros(0),
            theta: BitString::zeros(0),
            kept: Vec::new(),
            last_batch: None,
            outcome: None,
            commitment: None,
        })
    }

    pub fn outcome(&self) -> Option<&AliceOutcome> {
        self.outcome.as_ref()
    }

    pub fn into_outcome(self) -> Option<AliceOutcome> {
        self.outcome
    }

    /// Next action at time `now`.
    pub fn poll(&mut self, now: Instant) -> Poll {
        if let Some(msg) = self.outbox.pop_front() {
            return Poll::Send(msg);
        }
        match self.phase {
            Phase::AwaitHello | Phase::AwaitMissing | Phase::AwaitVerdict => Poll::Receive,
            Phase::Batches => {
                let batch = self.next_batch();
                self.last_batch = Some(now);
                if self.next_round == self.signals() {
                    self.phase = Phase::AwaitMissing;
                }
                Poll::Send(batch)
            }
            Phase::Waiting => {
                let ready = self.last_batch.map_or(now, |t| t + self.cfg.delta_t);
                if now < ready {
                    return Poll::Sleep(ready - now);
                }
                self.commit_and_open();
                self.phase = Phase::AwaitVerdict;
                self.poll(now)
            }
            Phase::Done => Poll::Done,
        }
    }

    pub fn receive(&mut self, msg: Message) {
        match (self.phase, msg) {
            (Phase::AwaitHello, Message::Hello { session, digest }) => {
                if session != self.cfg.session || digest != self.cfg.digest() {
                    self.abort(Reason::DigestMismatch);
                } else {
                    self.phase = Phase::Batches;
                }
            }
            (Phase::AwaitMissing, Message::Missing(missing)) => self.on_missing(&missing),
            (Phase::AwaitVerdict, Message::Verdict { accepted, reason, opened }) => {
                let verdict = Verdict {
                    accepted,
                    reason,
                    opened: accepted.then_some(opened),
                };
                self.finish(Some(verdict), None);
            }
            (Phase::AwaitVerdict, Message::Abort(reason)) => self.finish(Some(Verdict::reject(reason)), None),
            (Phase::Done, _) => {}
            (_, Message::Abort(reason)) => self.finish_fresh(reason),
            _ => self.abort(Reason::ProtocolViolation),
        }
    }

    /// The driver lost the connection or could not decode a frame.
    pub fn fail(&mut self, reason: Reason) {
        if self.phase != Phase::Done {
            self.finish_fresh(reason);
        }
    }

    fn signals(&self) -> usize {
        self.cfg.params.signals as usize
    }

    fn next_batch(&mut self) -> Message {
        let len = self.cfg.batch_rounds.min(self.signals() - self.next_round);
        let x = BitString::random(len, &mut self.rng);
        let theta = BitString::random(len, &mut self.rng);
        let mut click = BitString::zeros(len);
        let mut flip = BitString::zeros(len);
        for i in 0..len {
            let r = self.inputs.channel.sample(&mut self.channel_rng);
            if r.click {
                click.set(i, true);
            }
            if r.flip {
                flip.set(i, true);
            }
        }
        self.x.extend_from(&x);
        self.theta.extend_from(&theta);
        self.next_round += len;
        Message::ChannelBatch { x, theta, click, flip }
    }

    fn on_missing(&mut self, missing: &[u32]) {
        let total = self.signals();
        let well_formed = missing.windows(2).all(|w| w[0] < w[1]) && missing.last().is_none_or(|&i| (i as usize) < total);
        if !well_formed {
            return self.abort(Reason::ProtocolViolation);
        }
        let (lo, hi) = self.cfg.missing_interval();
        let count = missing.len() as u64;
        if count < lo || count > hi {
            return self.abort(Reason::MissingRoundsOutOfInterval);
        }
        let mut lost = BitString::zeros(total);
        for &i in missing {
            lost.set(i as usize, true);
        }
        let survivors: Vec<usize> = (0..total).filter(|&i| !lost.get(i)).collect();
        let n = self.cfg.params.n;
        if survivors.len() < n {
            return self.abort(Reason::MissingRoundsOutOfInterval);
        }
        let mut pick = index::sample(&mut self.rng, survivors.len(), n).into_vec();
        pick.sort_unstable();
        self.kept = pick.into_iter().map(|i| survivors[i]).collect();
        self.outbox
            .push_back(Message::Truncation(self.kept.iter().map(|&i| i as u32).collect()));
        self.phase = Phase::Waiting;
    }

    fn commit_and_open(&mut self) {
        let x = self.x.select(&self.kept);
        let theta = self.theta.select(&self.kept);
        self.outbox.push_back(Message::Basis(theta.clone()));
        let com = bc_commit(&x, self.cfg.code.check.as_ref(), &self.inputs.commit, &mut self.rng)
            .expect("lengths fixed by the session config");
        self.outbox.push_back(Message::Syndrome(com.w.clone()));
        self.outbox.push_back(Message::Seed(com.seed.bits().clone()));
        self.outbox.push_back(Message::Mask(com.e.clone()));
        self.outbox
            .push_back(Message::Open(cheating_alice_open(&x, &self.inputs.flips)));
        self.x = x;
        self.theta = theta;
        self.commitment = Some(com);
    }

    fn abort(&mut self, reason: Reason) {
        self.outbox.push_back(Message::Abort(reason));
        self.finish_fresh(reason);
    }

    /// An aborted weak string erasure leaves Alice with a fresh uniform string.
    fn finish_fresh(&mut self, reason: Reason) {
        if self.commitment.is_none() {
            let n = self.cfg.params.n;
            self.x = BitString::random(n, &mut self.rng);
            self.theta = BitString::zeros(0);
        }
        self.finish(None, Some(reason));
    }

    fn finish(&mut self, bob_verdict: Option<Verdict>, abort: Option<Reason>) {
        self.phase = Phase::Done;
        self.outcome = Some(AliceOutcome {
            x: std::mem::take(&mut self.x),
            theta: std::mem::take(&mut self.theta),
            commitment: self.commitment.take(),
            bob_verdict,
            abort,
        });
    }
}

impl std::fmt::Debug for Alice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Alice").field("phase", &self.phase).finish_non_exhaustive()
    }
}

