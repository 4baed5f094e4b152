//! Run configuration from `key = value` files and overrides.
//!
//! Later sources win: defaults, then a file, then command-line overrides,
//! each applied with [`RunConfig::apply`].

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use crate::bits::BitString;
use crate::codes::LinearCode;
use crate::error::Error;
use crate::photon::RoundChannel;
use crate::protocol::{AliceInputs, CodeSource, SessionConfig};
use crate::security::params::for_block_length;
use crate::security::{derive_params, StorageAssumption};

/// Parsed `key = value` pairs, in key order. Blank lines and `#` comments are
/// ignored; a repeated key is an error.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvConfig(pub BTreeMap<String, String>);

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: "expected key = value".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("bad key {key:?}"),
                });
            }
            if map.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("duplicate key {key:?}"),
                });
            }
        }
        Ok(Self(map))
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CodeSpec {
    /// Parity-check matrix regenerated from a seed; `k = None` picks the
    /// default rate.
    Seeded { k: Option<usize>, seed: u64 },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub epsilon: f64,
    pub n: Option<usize>,
    pub signals: Option<u64>,
    pub p_err: f64,
    pub p_noclick_h: f64,
    pub p_noclick_d: f64,
    pub p_sent: [f64; 3],
    pub code: CodeSpec,
    pub commit: BitString,
    pub delta_t: Duration,
    pub seed_alice: u64,
    pub seed_bob: u64,
    pub seed_channel: u64,
    pub session: u64,
    pub storage: StorageAssumption,
}

pub const DEFAULT_N: usize = 250_000;
pub const DEFAULT_RATE: f64 = 0.531;

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.99e-5,
            n: None,
            signals: None,
            p_err: 0.0412,
            p_noclick_h: 0.909,
            p_noclick_d: 0.875,
            p_sent: [0.875, 0.125, 5.32e-4],
            code: CodeSpec::Seeded { k: None, seed: 1 },
            commit: BitString::zeros(1),
            delta_t: Duration::ZERO,
            seed_alice: 1,
            seed_bob: 2,
            seed_channel: 3,
            session: 0,
            storage: StorageAssumption::Depolarizing { qubits: 972.0, r: 0.9 },
        }
    }
}

pub const KEYS: [&str; 21] = [
    "epsilon",
    "n",
    "signals",
    "p_err",
    "p_noclick_h",
    "p_noclick_d",
    "p_sent_0",
    "p_sent_1",
    "p_sent_multi",
    "code",
    "code_k",
    "code_seed",
    "commit",
    "delta_t",
    "seed_alice",
    "seed_bob",
    "seed_channel",
    "session",
    "storage",
    "storage_qubits",
    "storage_r",
];

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, Error> {
    v.parse()
        .map_err(|_| Error::Domain(format!("{key}: cannot parse {v:?}")))
}

fn probability(key: &str, v: &str) -> Result<f64, Error> {
    let p: f64 = num(key, v)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("{key} = {p} outside [0, 1]")));
    }
    Ok(p)
}

impl RunConfig {
    /// Applies every pair in `kv`, rejecting unknown keys.
    pub fn apply(&mut self, kv: &KvConfig) -> Result<(), Error> {
        if kv.0.contains_key("code") && (kv.0.contains_key("code_k") || kv.0.contains_key("code_seed")) {
            return Err(Error::Domain("give either a code file or code_k/code_seed, not both".into()));
        }
        let mut storage_kind = None;
        for (key, v) in &kv.0 {
            let v = v.as_str();
            match key.as_str() {
                "epsilon" => {
                    self.epsilon = num(key, v)?;
                    if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
                        return Err(Error::Domain(format!("epsilon {} outside (0, 1)", self.epsilon)));
                    }
                }
                "n" => self.n = Some(num(key, v)?),
                "signals" => self.signals = Some(num(key, v)?),
                "p_err" => self.p_err = probability(key, v)?,
                "p_noclick_h" => self.p_noclick_h = probability(key, v)?,
                "p_noclick_d" => self.p_noclick_d = probability(key, v)?,
                "p_sent_0" => self.p_sent[0] = probability(key, v)?,
                "p_sent_1" => self.p_sent[1] = probability(key, v)?,
                "p_sent_multi" => self.p_sent[2] = probability(key, v)?,
                "code" => self.code = CodeSpec::File(PathBuf::from(v)),
                "code_k" | "code_seed" => {
                    let (mut k, mut seed) = match self.code {
                        CodeSpec::Seeded { k, seed } => (k, seed),
                        CodeSpec::File(_) => (None, 1),
                    };
                    if key == "code_k" {
                        k = Some(num(key, v)?);
                    } else {
                        seed = num(key, v)?;
                    }
                    self.code = CodeSpec::Seeded { k, seed };
                }
                "commit" => {
                    if v.is_empty() || !v.chars().all(|c| c == '0' || c == '1') {
                        return Err(Error::Domain(format!("commit must be a nonempty binary string, got {v:?}")));
                    }
                    self.commit = v.chars().map(|c| c == '1').collect();
                }
                "delta_t" => {
                    let s: f64 = num(key, v)?;
                    self.delta_t = Duration::try_from_secs_f64(s)
                        .map_err(|_| Error::Domain(format!("delta_t {s} must be a nonnegative number of seconds")))?;
                }
                "seed_alice" => self.seed_alice = num(key, v)?,
                "seed_bob" => self.seed_bob = num(key, v)?,
                "seed_channel" => self.seed_channel = num(key, v)?,
                "session" => self.session = num(key, v)?,
                "storage" => storage_kind = Some(v),
                "storage_qubits" => self.storage = self.storage.with_qubits(num(key, v)?),
                "storage_r" => {
                    let r = probability(key, v)?;
                    self.storage = StorageAssumption::Depolarizing {
                        qubits: self.storage.qubits(),
                        r,
                    };
                }
                other => return Err(Error::Domain(format!("unknown configuration key {other:?}"))),
            }
        }
        if let Some(kind) = storage_kind {
            let qubits = self.storage.qubits();
            self.storage = match (kind, self.storage) {
                ("bounded", _) => StorageAssumption::Bounded { qubits },
                ("depolarizing", StorageAssumption::Depolarizing { r, .. }) => StorageAssumption::Depolarizing { qubits, r },
                ("depolarizing", StorageAssumption::Bounded { .. }) => StorageAssumption::Depolarizing { qubits, r: 0.9 },
                _ => return Err(Error::Domain(format!("storage must be bounded or depolarizing, got {kind:?}"))),
            };
        }
        self.storage.validate()
    }

    /// Block length or signal count, exactly one of which is in effect.
    pub fn size(&self) -> Result<Size, Error> {
        match (self.n, self.signals) {
            (Some(_), Some(_)) => Err(Error::Domain("give either n or signals, not both".into())),
            (Some(n), None) => Ok(Size::Block(n)),
            (None, Some(m)) => Ok(Size::Signals(m)),
            (None, None) => Ok(Size::Block(DEFAULT_N)),
        }
    }

    pub fn to_kv(&self) -> KvConfig {
        let mut kv = KvConfig::default();
        kv.set("epsilon", format!("{:?}", self.epsilon));
        if let Some(n) = self.n {
            kv.set("n", n);
        }
        if let Some(m) = self.signals {
            kv.set("signals", m);
        }
        kv.set("p_err", format!("{:?}", self.p_err));
        kv.set("p_noclick_h", format!("{:?}", self.p_noclick_h));
        kv.set("p_noclick_d", format!("{:?}", self.p_noclick_d));
        for (k, v) in ["p_sent_0", "p_sent_1", "p_sent_multi"].iter().zip(self.p_sent) {
            kv.set(k, format!("{v:?}"));
        }
        match &self.code {
            CodeSpec::Seeded { k, seed } => {
                if let Some(k) = k {
                    kv.set("code_k", k);
                }
                kv.set("code_seed", seed);
            }
            CodeSpec::File(p) => kv.set("code", p.display()),
        }
        kv.set("commit", self.commit.iter().map(|b| if b { '1' } else { '0' }).collect::<String>());
        kv.set("delta_t", format!("{:?}", self.delta_t.as_secs_f64()));
        kv.set("seed_alice", self.seed_alice);
        kv.set("seed_bob", self.seed_bob);
        kv.set("seed_channel", self.seed_channel);
        kv.set("session", self.session);
        match self.storage {
            StorageAssumption::Bounded { qubits } => {
                kv.set("storage", "bounded");
                kv.set("storage_qubits", format!("{qubits:?}"));
            }
            StorageAssumption::Depolarizing { qubits, r } => {
                kv.set("storage", "depolarizing");
                kv.set("storage_qubits", format!("{qubits:?}"));
                kv.set("storage_r", format!("{r:?}"));
            }
        }
        kv
    }
}

impl RunConfig {
    /// The parameters both parties agree on. A code file is read from disk;
    /// a seeded code defaults to rate `DEFAULT_RATE`.
    pub fn session_config(&self) -> Result<SessionConfig, Error> {
        let params = match self.size()? {
            Size::Block(n) => for_block_length(self.epsilon, n, self.p_noclick_h)?,
            Size::Signals(m) => derive_params(self.epsilon, m, self.p_noclick_h)?,
        };
        let code = match &self.code {
            CodeSpec::Seeded { k, seed } => {
                let k = k.unwrap_or_else(|| (DEFAULT_RATE * params.n as f64).round() as usize);
                CodeSource::seeded(params.n, k, *seed)?
            }
            CodeSpec::File(path) => {
                let bytes = std::fs::read(path).map_err(|e| Error::CodeFile(format!("{}: {e}", path.display())))?;
                CodeSource::from_code(LinearCode::from_bytes(&bytes)?)
            }
        };
        let mut cfg = SessionConfig::new(params, self.p_err, code, self.commit.len())?;
        cfg.delta_t = self.delta_t;
        cfg.session = self.session;
        Ok(cfg)
    }

    /// Alice's inputs, with the source simulated at this loss and error rate.
    pub fn alice_inputs(&self) -> Result<AliceInputs, Error> {
        Ok(AliceInputs {
            commit: self.commit.clone(),
            seed: self.seed_alice,
            channel_seed: self.seed_channel,
            channel: RoundChannel::new(self.p_noclick_h, self.p_err)?,
            flips: Vec::new(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Size {
    Block(usize),
    Signals(u64),
}
