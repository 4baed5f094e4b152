use std::collections::VecDeque;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{bob_precheck, bob_verify, BobOutcome, Commitment, Poll, Reason, SessionConfig, Verdict};
use crate::bits::BitString;
use crate::error::Error;
use crate::hashing::HashSeed;
use crate::wire::Message;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Batches,
    AwaitTruncation,
    AwaitBasis,
    AwaitSyndrome,
    AwaitSeed,
    AwaitMask,
    AwaitOpen,
    /// Aborted after the basis; swallow Alice's remaining commit messages.
    Draining,
    Done,
}

/// Honest receiver.
pub struct Bob {
    cfg: SessionConfig,
    rng: ChaCha20Rng,
    phase: Phase,
    outbox: VecDeque<Message>,
    /// Per-round detection, basis and measured bit.
    click: BitString,
    basis: BitString,
    bits: BitString,
    rounds: usize,
    kept: Vec<usize>,
    indices: Vec<usize>,
    z: BitString,
    w: Option<BitString>,
    seed: Option<HashSeed>,
    commitment: Option<Commitment>,
    verdict: Option<Verdict>,
}

impl Bob {
    pub fn new(cfg: SessionConfig, seed: u64) -> Result<Self, Error> {
        cfg.validate()?;
        let mut outbox = VecDeque::new();
        outbox.push_back(Message::Hello {
            session: cfg.session,
            digest: cfg.digest(),
        });
        Ok(Self {
            cfg,
            rng: ChaCha20Rng::seed_from_u64(seed),
            phase: Phase::Batches,
            outbox,
            click: BitString::zeros(0),
            basis: BitString::zeros(0),
            bits: BitString::zeros(0),
            rounds: 0,
            kept: Vec::new(),
            indices: Vec::new(),
            z: BitString::zeros(0),
            w: None,
            seed: None,
            commitment: None,
            verdict: None,
        })
    }

    pub fn poll(&mut self) -> Poll {
        if let Some(msg) = self.outbox.pop_front() {
            return Poll::Send(msg);
        }
        match self.phase {
            Phase::Done => Poll::Done,
            _ => Poll::Receive,
        }
    }

    pub fn outcome(&self) -> Option<BobOutcome> {
        if self.phase != Phase::Done && self.phase != Phase::Draining {
            return None;
        }
        Some(BobOutcome {
            indices: self.indices.clone(),
            z: self.z.clone(),
            commitment: self.commitment.clone(),
            verdict: self.verdict.clone()?,
        })
    }

    pub fn fail(&mut self, reason: Reason) {
        if self.phase == Phase::Draining {
            self.phase = Phase::Done;
        } else if self.phase != Phase::Done {
            self.verdict = Some(Verdict::reject(reason));
            self.phase = Phase::Done;
        }
    }

    pub fn receive(&mut self, msg: Message) {
        let signals = self.cfg.params.signals as usize;
        match (self.phase, msg) {
            (Phase::Batches, Message::ChannelBatch { x, theta, click, flip }) => {
                if self.rounds + x.len() > signals || x.is_empty() {
                    return self.abort(Reason::ProtocolViolation);
                }
                self.measure(&x, &theta, &click, &flip);
                if self.rounds == signals {
                    let missing = (0..signals).filter(|&i| !self.click.get(i)).map(|i| i as u32).collect();
                    self.outbox.push_back(Message::Missing(missing));
                    self.phase = Phase::AwaitTruncation;
                }
            }
            (Phase::AwaitTruncation, Message::Truncation(kept)) => {
                let valid = kept.len() == self.cfg.params.n
                    && kept.windows(2).all(|w| w[0] < w[1])
                    && kept.iter().all(|&i| (i as usize) < signals && self.click.get(i as usize));
                if !valid {
                    return self.abort(Reason::ProtocolViolation);
                }
                self.kept = kept.into_iter().map(|i| i as usize).collect();
                self.phase = Phase::AwaitBasis;
            }
            (Phase::AwaitBasis, Message::Basis(theta)) => {
                if theta.len() != self.cfg.params.n {
                    return self.abort(Reason::ProtocolViolation);
                }
                let matched: Vec<usize> = (0..theta.len())
                    .filter(|&j| theta.get(j) == self.basis.get(self.kept[j]))
                    .collect();
                match bob_precheck(&matched, self.cfg.params.m, &mut self.rng) {
                    Some(indices) => {
                        self.z = indices.iter().map(|&j| self.bits.get(self.kept[j])).collect();
                        self.indices = indices;
                        self.phase = Phase::AwaitSyndrome;
                    }
                    None => {
                        self.outbox.push_back(Message::Abort(Reason::TooFewBits));
                        self.verdict = Some(Verdict::reject(Reason::TooFewBits));
                        self.phase = Phase::Draining;
                    }
                }
            }
            (Phase::AwaitSyndrome, Message::Syndrome(w)) => {
                if w.len() != self.cfg.code.check.redundancy() {
                    return self.abort(Reason::ProtocolViolation);
                }
                self.w = Some(w);
                self.phase = Phase::AwaitSeed;
            }
            (Phase::AwaitSeed, Message::Seed(bits)) => match HashSeed::new(self.cfg.params.n, self.cfg.l, bits) {
                Ok(seed) => {
                    self.seed = Some(seed);
                    self.phase = Phase::AwaitMask;
                }
                Err(_) => self.abort(Reason::ProtocolViolation),
            },
            (Phase::AwaitMask, Message::Mask(e)) => {
                if e.len() != self.cfg.l {
                    return self.abort(Reason::ProtocolViolation);
                }
                self.commitment = Some(Commitment {
                    w: self.w.take().expect("syndrome received"),
                    seed: self.seed.take().expect("seed received"),
                    e,
                });
                self.phase = Phase::AwaitOpen;
            }
            (Phase::AwaitOpen, Message::Open(x)) => {
                if x.len() != self.cfg.params.n {
                    return self.abort(Reason::ProtocolViolation);
                }
                let com = self.commitment.as_ref().expect("commitment received");
                let verdict = bob_verify(
                    &x,
                    com,
                    self.cfg.code.check.as_ref(),
                    &self.z,
                    &self.indices,
                    self.cfg.p_err,
                    self.cfg.params.alpha2,
                )
                .expect("lengths checked");
                self.outbox.push_back(verdict.to_message());
                self.verdict = Some(verdict);
                self.phase = Phase::Done;
            }
            (Phase::Draining, Message::Open(_)) => self.phase = Phase::Done,
            (Phase::Draining, Message::Syndrome(_) | Message::Seed(_) | Message::Mask(_)) => {}
            (Phase::Done, _) => {}
            (_, Message::Abort(reason)) => {
                self.verdict = Some(Verdict::reject(reason));
                self.phase = Phase::Done;
            }
            _ => self.abort(Reason::ProtocolViolation),
        }
    }

    /// Measures a batch word by word: on a matching basis the bit is Alice's
    /// bit XOR the channel flip, otherwise a fresh uniform bit.
    fn measure(&mut self, x: &BitString, theta: &BitString, click: &BitString, flip: &BitString) {
        let basis = BitString::random(x.len(), &mut self.rng);
        let words: Vec<u64> = (0..basis.words().len())
            .map(|i| {
                let matched = !(basis.words()[i] ^ theta.words()[i]);
                let noise = self.rng.next_u64();
                ((x.words()[i] ^ flip.words()[i]) & matched) | (noise & !matched)
            })
            .collect();
        let bits = BitString::from_words(x.len(), words);
        self.click.extend_from(click);
        self.basis.extend_from(&basis);
        self.bits.extend_from(&bits);
        self.rounds += x.len();
    }

    fn abort(&mut self, reason: Reason) {
        self.outbox.push_back(Message::Abort(reason));
        self.verdict = Some(Verdict::reject(reason));
        self.phase = Phase::Done;
    }
}

impl std::fmt::Debug for Bob {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Bob").field("phase", &self.phase).finish_non_exhaustive()
    }
}

