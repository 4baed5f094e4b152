//! Weak string erasure followed by commit and open.
//!
//! Both parties are sans-IO state machines: they consume [`Message`]s and
//! emit [`Poll`] actions, so the same logic runs in process, over a socket,
//! or against a recorded transcript.

mod alice;
mod bob;
mod local;

use std::sync::Arc;
use std::time::Duration;

use rand::seq::index;
use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::bits::BitString;
use crate::codes::{ParityCheck, SeededCode};
use crate::error::Error;
use crate::hashing::{extract, one_time_pad, sample_hash_seed, HashSeed};
use crate::photon::RoundChannel;
use crate::security::params::{for_block_length, SecurityParams};
use crate::wire::{Message, DIGEST_LEN};

pub use alice::Alice;
pub use bob::Bob;
pub use local::{run_local, run_pair, LocalRun};

/// Why a session ended. Codes `0..=4` cover the checks of the protocol
/// itself; the rest are transport conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Reason {
    Ok = 0,
    SyndromeMismatch = 1,
    ErrorCountOutOfInterval = 2,
    TooFewBits = 3,
    MissingRoundsOutOfInterval = 4,
    DigestMismatch = 5,
    Malformed = 6,
    ConnectionLost = 7,
    ProtocolViolation = 8,
}

impl Reason {
    pub const ALL: [Reason; 9] = [
        Reason::Ok,
        Reason::SyndromeMismatch,
        Reason::ErrorCountOutOfInterval,
        Reason::TooFewBits,
        Reason::MissingRoundsOutOfInterval,
        Reason::DigestMismatch,
        Reason::Malformed,
        Reason::ConnectionLost,
        Reason::ProtocolViolation,
    ];

    pub fn from_u8(b: u8) -> Option<Self> {
        Self::ALL.get(b as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Reason::Ok => "ok",
            Reason::SyndromeMismatch => "syndrome_mismatch",
            Reason::ErrorCountOutOfInterval => "error_count_out_of_interval",
            Reason::TooFewBits => "too_few_bits",
            Reason::MissingRoundsOutOfInterval => "missing_rounds_out_of_interval",
            Reason::DigestMismatch => "digest_mismatch",
            Reason::Malformed => "malformed",
            Reason::ConnectionLost => "connection_lost",
            Reason::ProtocolViolation => "protocol_violation",
        }
    }
}

impl std::fmt::Display for Reason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commitment {
    pub w: BitString,
    pub seed: HashSeed,
    pub e: BitString,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub accepted: bool,
    pub reason: Reason,
    /// Present exactly when `accepted`.
    pub opened: Option<BitString>,
}

impl Verdict {
    pub fn reject(reason: Reason) -> Self {
        Self {
            accepted: false,
            reason,
            opened: None,
        }
    }

    pub fn accept(opened: BitString) -> Self {
        Self {
            accepted: true,
            reason: Reason::Ok,
            opened: Some(opened),
        }
    }

    pub fn to_message(&self) -> Message {
        Message::Verdict {
            accepted: self.accepted,
            reason: self.reason,
            opened: self.opened.clone().unwrap_or_default(),
        }
    }
}

/// `w = Syn(x)`, a fresh hash seed, and `e = c XOR Ext(x, seed)`.
pub fn bc_commit<R: RngCore + ?Sized>(
    x: &BitString,
    code: &dyn ParityCheck,
    c: &BitString,
    rng: &mut R,
) -> Result<Commitment, Error> {
    if x.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            actual: x.len(),
        });
    }
    let w = code.syndrome(x)?;
    let seed = sample_hash_seed(x.len(), c.len(), rng)?;
    let e = one_time_pad(c, &extract(x, &seed)?)?;
    Ok(Commitment { w, seed, e })
}

/// Keeps a uniformly chosen `m`-subset of `indices` (in increasing order),
/// or `None` if there are fewer than `m`.
pub fn bob_precheck<R: RngCore + ?Sized>(indices: &[usize], m: usize, rng: &mut R) -> Option<Vec<usize>> {
    if indices.len() < m {
        return None;
    }
    let mut pick = index::sample(rng, indices.len(), m).into_vec();
    pick.sort_unstable();
    Some(pick.into_iter().map(|i| indices[i]).collect())
}

/// Inclusive bounds on disagreements among `m` tested bits.
pub fn error_interval(m: usize, p_err: f64, alpha2: f64) -> (usize, usize) {
    let m = m as f64;
    (
        ((p_err - alpha2) * m).floor().max(0.0) as usize,
        ((p_err + alpha2) * m).ceil() as usize,
    )
}

/// Syndrome check, then the error count of `x_opened` against Bob's bits `z`
/// at positions `indices`. On success the committed string is `e XOR Ext`.
pub fn bob_verify(
    x_opened: &BitString,
    commitment: &Commitment,
    code: &dyn ParityCheck,
    z: &BitString,
    indices: &[usize],
    p_err: f64,
    alpha2: f64,
) -> Result<Verdict, Error> {
    if z.len() != indices.len() {
        return Err(Error::LengthMismatch {
            expected: indices.len(),
            actual: z.len(),
        });
    }
    if code.syndrome(x_opened)? != commitment.w {
        return Ok(Verdict::reject(Reason::SyndromeMismatch));
    }
    let errors = indices
        .iter()
        .zip(z.iter())
        .filter(|&(&i, b)| x_opened.get(i) != b)
        .count();
    let (lo, hi) = error_interval(indices.len(), p_err, alpha2);
    if errors < lo || errors > hi {
        return Ok(Verdict::reject(Reason::ErrorCountOutOfInterval));
    }
    let d = extract(x_opened, &commitment.seed)?;
    Ok(Verdict::accept(one_time_pad(&commitment.e, &d)?))
}

/// `x` with the positions in `flips` toggled.
pub fn cheating_alice_open(x: &BitString, flips: &[usize]) -> BitString {
    let mut out = x.clone();
    for &i in flips {
        out.flip(i);
    }
    out
}

/// The agreed code: a descriptor that enters the parameter digest, and the
/// syndrome implementation.
#[derive(Clone)]
pub struct CodeSource {
    pub descriptor: String,
    pub check: Arc<dyn ParityCheck + Send>,
}

impl CodeSource {
    pub fn seeded(n: usize, k: usize, seed: u64) -> Result<Self, Error> {
        Ok(Self {
            descriptor: format!("seeded:{n}:{k}:{seed}"),
            check: Arc::new(SeededCode::new(n, k, seed)?),
        })
    }

    /// A materialized matrix identified by a digest of its file bytes.
    pub fn from_code(code: crate::codes::LinearCode) -> Self {
        let digest = Sha256::digest(code.to_bytes());
        Self {
            descriptor: format!("file:{}", hex(&digest)),
            check: Arc::new(code),
        }
    }
}

impl std::fmt::Debug for CodeSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CodeSource({})", self.descriptor)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything both parties must agree on before a session.
#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub params: SecurityParams,
    /// Error rate the open-phase interval is centred on.
    pub p_err: f64,
    pub code: CodeSource,
    /// Length of the committed string.
    pub l: usize,
    pub delta_t: Duration,
    pub session: u64,
    /// Rounds per channel batch.
    pub batch_rounds: usize,
}

pub const DEFAULT_BATCH_ROUNDS: usize = 1 << 20;

impl SessionConfig {
    pub fn new(params: SecurityParams, p_err: f64, code: CodeSource, l: usize) -> Result<Self, Error> {
        let cfg = Self {
            params,
            p_err,
            code,
            l,
            delta_t: Duration::ZERO,
            session: 0,
            batch_rounds: DEFAULT_BATCH_ROUNDS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parameters for block length `n` at the given no-click probability.
    pub fn for_block(
        epsilon: f64,
        n: usize,
        p_noclick: f64,
        p_err: f64,
        code: CodeSource,
        l: usize,
    ) -> Result<Self, Error> {
        Self::new(for_block_length(epsilon, n, p_noclick)?, p_err, code, l)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.code.check.n() != self.params.n {
            return Err(Error::LengthMismatch {
                expected: self.params.n,
                actual: self.code.check.n(),
            });
        }
        if self.l == 0 || self.l > self.params.n {
            return Err(Error::InvalidHashLength {
                n: self.params.n,
                l: self.l,
            });
        }
        if !(0.0..0.5).contains(&self.p_err) {
            return Err(Error::Domain(format!("p_err {} must lie in [0, 1/2)", self.p_err)));
        }
        if self.params.signals > u32::MAX as u64 {
            return Err(Error::Domain("signal count must fit in 32 bits".into()));
        }
        if self.batch_rounds == 0 {
            return Err(Error::Domain("batch size must be positive".into()));
        }
        Ok(())
    }

    /// Inclusive bounds on the number of rounds Bob may report missing.
    pub fn missing_interval(&self) -> (u64, u64) {
        self.params.missing_interval()
    }

    /// SHA-256 over a canonical listing of the agreed parameters.
    pub fn digest(&self) -> [u8; DIGEST_LEN] {
        let p = &self.params;
        let text = format!(
            "bcns-session v1\nepsilon={:?}\nsignals={}\np_noclick={:?}\nn={}\nm={}\np_err={:?}\ncode={}\nl={}\ndelta_t_ns={}\nbatch={}\n",
            p.epsilon,
            p.signals,
            p.p_noclick,
            p.n,
            p.m,
            self.p_err,
            self.code.descriptor,
            self.l,
            self.delta_t.as_nanos(),
            self.batch_rounds,
        );
        Sha256::digest(text.as_bytes()).into()
    }
}

/// Alice's private inputs.
#[derive(Debug, Clone)]
pub struct AliceInputs {
    pub commit: BitString,
    pub seed: u64,
    /// Seed of the simulated source and channel Alice hosts.
    pub channel_seed: u64,
    pub channel: RoundChannel,
    /// Positions to toggle before opening; empty for an honest Alice.
    pub flips: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliceOutcome {
    /// The `n` kept bits, or a fresh uniform string after an abort.
    pub x: BitString,
    pub theta: BitString,
    pub commitment: Option<Commitment>,
    /// Bob's final verdict as reported to Alice.
    pub bob_verdict: Option<Verdict>,
    pub abort: Option<Reason>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BobOutcome {
    /// Tested positions in the block, after truncation to `m`.
    pub indices: Vec<usize>,
    pub z: BitString,
    pub commitment: Option<Commitment>,
    pub verdict: Verdict,
}

/// Next action a party wants from its driver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Poll {
    Send(Message),
    /// Wait for the peer's next message.
    Receive,
    /// Nothing to do until this much more time has passed.
    Sleep(Duration),
    Done,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{generate_parity_check, min_distance_bruteforce, LinearCode};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn zero_commit() {
        let code = generate_parity_check(64, 32, 1).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let c = bc_commit(&BitString::zeros(64), &code, &BitString::zeros(1), &mut rng).unwrap();
        assert_eq!(c.w, BitString::zeros(32));
        assert_eq!(c.e, BitString::zeros(1));
        assert!(bc_commit(&BitString::zeros(63), &code, &BitString::zeros(1), &mut rng).is_err());
    }

    #[test]
    fn syndrome_length_at_full_scale() {
        let code = SeededCode::new(250_000, 132_750, 7).unwrap();
        assert_eq!(code.redundancy(), 117_250);
    }

    #[test]
    fn precheck_sizes() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let i: Vec<usize> = (0..10).map(|v| 3 * v).collect();
        assert_eq!(bob_precheck(&i, 10, &mut rng).unwrap(), i);
        assert_eq!(bob_precheck(&i, 11, &mut rng), None);
    }

    fn honest(code: &LinearCode) -> (BitString, Commitment, Vec<usize>, BitString, BitString) {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let x = BitString::random(code.n(), &mut rng);
        let c = BitString::random(2, &mut rng);
        let com = bc_commit(&x, code, &c, &mut rng).unwrap();
        let idx: Vec<usize> = (0..code.n()).step_by(2).collect();
        let z = x.select(&idx);
        (x, com, idx, z, c)
    }

    #[test]
    fn honest_open_recovers_bit() {
        let code = generate_parity_check(40, 20, 2).unwrap();
        let (x, com, idx, z, c) = honest(&code);
        let v = bob_verify(&x, &com, &code, &z, &idx, 0.0, 0.1).unwrap();
        assert_eq!(v, Verdict::accept(c));
    }

    #[test]
    fn single_flip_breaks_syndrome() {
        let code = generate_parity_check(40, 20, 2).unwrap();
        assert!(code.columns_nonzero());
        let (x, com, idx, z, _) = honest(&code);
        for i in 0..40 {
            let v = bob_verify(&cheating_alice_open(&x, &[i]), &com, &code, &z, &idx, 0.0, 0.1).unwrap();
            assert_eq!(v.reason, Reason::SyndromeMismatch);
        }
    }

    #[test]
    fn codeword_flip_on_tested_bit_is_caught() {
        let code = generate_parity_check(12, 6, 5).unwrap();
        let d = min_distance_bruteforce(&code).unwrap();
        assert!(d <= 12);
        let (x, com, idx, z, _) = honest(&code);
        let mut found = false;
        for word in 1u32..(1 << 12) {
            let flips: Vec<usize> = (0..12).filter(|i| word >> i & 1 == 1).collect();
            let cw: BitString = (0..12).map(|i| word >> i & 1 == 1).collect();
            if code.syndrome(&cw).unwrap().weight() != 0 {
                continue;
            }
            found = true;
            let v = bob_verify(&cheating_alice_open(&x, &flips), &com, &code, &z, &idx, 0.0, 0.0).unwrap();
            let hits_tested = flips.iter().any(|i| i % 2 == 0);
            assert_eq!(v.accepted, !hits_tested);
            if hits_tested {
                assert_eq!(v.reason, Reason::ErrorCountOutOfInterval);
            }
        }
        assert!(found);
    }

    #[test]
    fn reasons_round_trip() {
        for r in Reason::ALL {
            assert_eq!(Reason::from_u8(r as u8), Some(r));
        }
        assert_eq!(Reason::from_u8(9), None);
    }

    #[test]
    fn digest_tracks_parameters() {
        let cfg = SessionConfig::for_block(1e-3, 500, 0.5, 0.02, CodeSource::seeded(500, 250, 1).unwrap(), 1).unwrap();
        let mut other = cfg.clone();
        other.code = CodeSource::seeded(500, 250, 2).unwrap();
        assert_ne!(cfg.digest(), other.digest());
        assert_eq!(cfg.digest(), cfg.clone().digest());
        other = cfg.clone();
        other.delta_t = Duration::from_millis(1);
        assert_ne!(cfg.digest(), other.digest());
    }

    proptest! {
        #[test]
        fn precheck_is_exact_subset(s in any::<u64>(), m in 1usize..100) {
            let mut rng = ChaCha20Rng::seed_from_u64(s);
            let i: Vec<usize> = (0..2 * m).map(|v| 5 * v + 1).collect();
            let out = bob_precheck(&i, m, &mut rng).unwrap();
            prop_assert_eq!(out.len(), m);
            prop_assert!(out.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(out.iter().all(|v| i.contains(v)));
        }

        #[test]
        fn hiding_transcripts_differ_only_in_mask(s in any::<u64>()) {
            let code = generate_parity_check(30, 15, s).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(s);
            let x = BitString::random(30, &mut rng);
            let c0 = BitString::zeros(1);
            let c1 = BitString::from_bits([true]);
            let a = bc_commit(&x, &code, &c0, &mut ChaCha20Rng::seed_from_u64(s)).unwrap();
            let b = bc_commit(&x, &code, &c1, &mut ChaCha20Rng::seed_from_u64(s)).unwrap();
            prop_assert_eq!(&a.w, &b.w);
            prop_assert_eq!(&a.seed, &b.seed);
            prop_assert_eq!(a.e.xor(&b.e).unwrap(), c1);
        }
    }
}
