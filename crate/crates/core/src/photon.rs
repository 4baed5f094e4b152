//! Monte-Carlo model of a pair source with lossy detectors.
//!
//! Two paths are offered. [`simulate_session`] produces timestamped detection
//! streams for both parties and is used to validate the rate estimator and
//! the coincidence logic. [`RoundChannel`] collapses the physics to the
//! per-round probabilities and drives protocol-scale runs.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::Error;
use crate::estimate::ExperimentalParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Emitted as part of pair number `.0`.
    Pair(u64),
    Background,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    pub timestamp: f64,
    pub side: Side,
    pub x: bool,
    pub theta: bool,
    /// Ground truth, available only for simulated streams.
    pub origin: Option<Origin>,
}

/// Basis and outcome skew of one party's detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bias {
    /// Probability of the diagonal basis.
    pub basis: f64,
    /// Probability of bit 1 when the outcome is not fixed by the partner.
    pub bit: f64,
}

impl Default for Bias {
    fn default() -> Self {
        Self { basis: 0.5, bit: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    /// Pair emission rate.
    pub r_s: f64,
    pub eta_a: f64,
    pub eta_b: f64,
    /// Background rates before detector losses.
    pub r_ba: f64,
    pub r_bb: f64,
    pub tau_c: f64,
    /// Flip probability on matched bases.
    pub p_err: f64,
    pub alice: Bias,
    pub bob: Bias,
}

impl SourceModel {
    /// A background-free source whose singles and coincidence rates equal
    /// the measured experiment: `r_A = 23758`, `r_B = 22227`, `r_p = 2997`.
    pub fn experiment() -> Self {
        let (r_a, r_b, r_p) = (23758.0, 22227.0, 2997.0);
        Self {
            r_s: r_a * r_b / r_p,
            eta_a: r_p / r_b,
            eta_b: r_p / r_a,
            r_ba: 0.0,
            r_bb: 0.0,
            tau_c: 3e-9,
            p_err: 0.0412,
            alice: Bias::default(),
            bob: Bias::default(),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let probs = [
            self.eta_a,
            self.eta_b,
            self.p_err,
            self.alice.basis,
            self.alice.bit,
            self.bob.basis,
            self.bob.bit,
        ];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Domain("model probabilities must lie in [0, 1]".into()));
        }
        let rates = [self.r_s, self.r_ba, self.r_bb];
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) || !(self.tau_c > 0.0) {
            return Err(Error::Domain("model rates must be nonnegative".into()));
        }
        Ok(())
    }

    /// Expected singles rate at Alice; backgrounds pass the same losses.
    pub fn expected_r_a(&self) -> f64 {
        self.eta_a * (self.r_s + self.r_ba)
    }

    pub fn expected_r_b(&self) -> f64 {
        self.eta_b * (self.r_s + self.r_bb)
    }

    /// Expected true coincidence rate, without accidentals.
    pub fn expected_r_p(&self) -> f64 {
        self.eta_a * self.eta_b * self.r_s
    }
}

fn poisson_times<R: Rng + ?Sized>(rate: f64, duration: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::new();
    if rate <= 0.0 {
        return out;
    }
    let exp = Exp::new(rate).expect("positive rate");
    let mut t = exp.sample(rng);
    while t < duration {
        out.push(t);
        t += exp.sample(rng);
    }
    out
}

/// Generates both detection streams over `duration` seconds, each sorted by
/// time.
pub fn simulate_session<R: Rng + ?Sized>(
    model: &SourceModel,
    duration: f64,
    rng: &mut R,
) -> Result<(Vec<DetectionEvent>, Vec<DetectionEvent>), Error> {
    model.validate()?;
    if !(duration > 0.0) {
        return Err(Error::Domain(format!("duration {duration} must be positive")));
    }
    let mut alice = Vec::new();
    let mut bob = Vec::new();
    for (id, t) in poisson_times(model.r_s, duration, rng).into_iter().enumerate() {
        let origin = Some(Origin::Pair(id as u64));
        let theta_a = rng.gen_bool(model.alice.basis);
        let x_a = rng.gen_bool(model.alice.bit);
        let theta_b = rng.gen_bool(model.bob.basis);
        // Singlet: matched bases give opposite outcomes up to noise.
        let x_b = if theta_a == theta_b {
            !x_a ^ rng.gen_bool(model.p_err)
        } else {
            rng.gen_bool(model.bob.bit)
        };
        if rng.gen_bool(model.eta_a) {
            alice.push(DetectionEvent {
                timestamp: t,
                side: Side::Alice,
                x: x_a,
                theta: theta_a,
                origin,
            });
        }
        if rng.gen_bool(model.eta_b) {
            bob.push(DetectionEvent {
                timestamp: t,
                side: Side::Bob,
                x: x_b,
                theta: theta_b,
                origin,
            });
        }
    }
    for (side, rate, bias, out) in [
        (Side::Alice, model.r_ba * model.eta_a, model.alice, &mut alice),
        (Side::Bob, model.r_bb * model.eta_b, model.bob, &mut bob),
    ] {
        for t in poisson_times(rate, duration, rng) {
            out.push(DetectionEvent {
                timestamp: t,
                side,
                x: rng.gen_bool(bias.bit),
                theta: rng.gen_bool(bias.basis),
                origin: Some(Origin::Background),
            });
        }
        out.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    }
    Ok((alice, bob))
}

/// One of Alice's detections, with Bob's partner if one fell in the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchedRound {
    pub alice: usize,
    /// `None` means the round is lost for Bob.
    pub bob: Option<usize>,
}

fn check_sorted(events: &[DetectionEvent], name: &'static str) -> Result<(), Error> {
    if events.windows(2).any(|w| w[0].timestamp > w[1].timestamp) {
        return Err(Error::Unsorted(name));
    }
    Ok(())
}

fn greedy_pairs(a: &[f64], b: &[f64], half: f64) -> Vec<Option<usize>> {
    let mut j = 0;
    a.iter()
        .map(|&ta| {
            while j < b.len() && b[j] < ta && ta - b[j] > half {
                j += 1;
            }
            if j < b.len() && (b[j] - ta).abs() <= half {
                j += 1;
                Some(j - 1)
            } else {
                None
            }
        })
        .collect()
}

/// Pairs each Alice event with the earliest unused Bob event within
/// `|t_A - t_B| <= tau_c / 2`.
pub fn match_coincidences(
    alice: &[DetectionEvent],
    bob: &[DetectionEvent],
    tau_c: f64,
) -> Result<Vec<MatchedRound>, Error> {
    check_sorted(alice, "alice")?;
    check_sorted(bob, "bob")?;
    let ta: Vec<f64> = alice.iter().map(|e| e.timestamp).collect();
    let tb: Vec<f64> = bob.iter().map(|e| e.timestamp).collect();
    Ok(greedy_pairs(&ta, &tb, tau_c / 2.0)
        .into_iter()
        .enumerate()
        .map(|(i, b)| MatchedRound { alice: i, bob: b })
        .collect())
}

/// Coincidences per second between Alice and Bob's stream delayed by
/// `tau_d`. With `tau_d` well beyond the pair correlation time, only
/// accidental coincidences remain.
pub fn displaced_coincidence_rate(
    alice: &[DetectionEvent],
    bob: &[DetectionEvent],
    tau_c: f64,
    tau_d: f64,
    duration: f64,
) -> Result<f64, Error> {
    check_sorted(alice, "alice")?;
    check_sorted(bob, "bob")?;
    let ta: Vec<f64> = alice.iter().map(|e| e.timestamp).collect();
    let tb: Vec<f64> = bob.iter().map(|e| e.timestamp + tau_d).collect();
    let hits = greedy_pairs(&ta, &tb, tau_c / 2.0).iter().flatten().count();
    Ok(hits as f64 / duration)
}

/// Raw singles and coincidence rates of a simulated session, in the shape
/// the estimator takes.
pub fn measured_rates(
    alice: &[DetectionEvent],
    bob: &[DetectionEvent],
    tau_c: f64,
    duration: f64,
) -> Result<crate::estimate::SourceRates, Error> {
    let rounds = match_coincidences(alice, bob, tau_c)?;
    let pairs = rounds.iter().filter(|r| r.bob.is_some()).count();
    Ok(crate::estimate::SourceRates::new(
        alice.len() as f64 / duration,
        bob.len() as f64 / duration,
        pairs as f64 / duration,
        tau_c,
    ))
}

/// Per-round channel built from the protocol probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundChannel {
    pub p_noclick: f64,
    pub p_err: f64,
}

/// What the source hands to Bob for one round: whether he detects anything
/// and whether the noise flips the bit on a matched basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelRound {
    pub click: bool,
    pub flip: bool,
}

/// Bob's view of one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BobRecord {
    pub click: bool,
    pub basis: bool,
    pub bit: bool,
}

impl RoundChannel {
    pub fn from_params(params: &ExperimentalParams) -> Result<Self, Error> {
        let p_err = params
            .p_err
            .ok_or_else(|| Error::Domain("channel needs a measured p_err".into()))?;
        Self::new(params.p_noclick_h, p_err)
    }

    pub fn new(p_noclick: f64, p_err: f64) -> Result<Self, Error> {
        if !(0.0..=1.0).contains(&p_noclick) || !(0.0..=1.0).contains(&p_err) {
            return Err(Error::Domain("channel probabilities must lie in [0, 1]".into()));
        }
        Ok(Self { p_noclick, p_err })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRound {
        ChannelRound {
            click: !rng.gen_bool(self.p_noclick),
            flip: rng.gen_bool(self.p_err),
        }
    }
}

impl ChannelRound {
    /// Bob's measurement of a photon prepared as `(x, theta)`. A mismatched
    /// basis yields a uniform bit.
    pub fn measure<R: Rng + ?Sized>(&self, x: bool, theta: bool, bob_basis: bool, rng: &mut R) -> bool {
        if bob_basis == theta {
            x ^ self.flip
        } else {
            rng.gen()
        }
    }
}

/// One full round from a single RNG: click, uniform basis, and the bit.
pub fn round_channel<R: Rng + ?Sized>(
    channel: &RoundChannel,
    x: bool,
    theta: bool,
    rng: &mut R,
) -> BobRecord {
    let round = channel.sample(rng);
    let basis = rng.gen();
    let bit = round.measure(x, theta, basis, rng);
    BobRecord {
        click: round.click,
        basis,
        bit,
    }
}

/// CSV dump with columns `timestamp,side,x,theta`, plus `origin` when
/// `with_origin` is set.
pub fn write_stream_csv(events: &[DetectionEvent], with_origin: bool) -> String {
    let mut out = String::from(if with_origin {
        "timestamp,side,x,theta,origin\n"
    } else {
        "timestamp,side,x,theta\n"
    });
    for e in events {
        let side = match e.side {
            Side::Alice => 'A',
            Side::Bob => 'B',
        };
        let _ = write!(out, "{:e},{side},{},{}", e.timestamp, e.x as u8, e.theta as u8);
        if with_origin {
            let origin = match e.origin {
                Some(Origin::Pair(id)) => format!("pair:{id}"),
                Some(Origin::Background) => "background".into(),
                None => String::new(),
            };
            let _ = write!(out, ",{origin}");
        }
        out.push('\n');
    }
    out
}

/// Parses the format written by [`write_stream_csv`].
pub fn parse_stream_csv(text: &str) -> Result<Vec<DetectionEvent>, Error> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    let headers = reader.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    let with_origin = match headers.iter().collect::<Vec<_>>().as_slice() {
        ["timestamp", "side", "x", "theta"] => false,
        ["timestamp", "side", "x", "theta", "origin"] => true,
        other => return Err(perr(1, format!("unexpected header {other:?}"))),
    };
    let bit = |s: &str, line: usize| match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(perr(line, format!("expected 0 or 1, got {s:?}"))),
    };
    let mut events = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| perr(line, e.to_string()))?;
        let timestamp: f64 = rec[0]
            .parse()
            .map_err(|_| perr(line, format!("bad timestamp {:?}", &rec[0])))?;
        if !timestamp.is_finite() {
            return Err(perr(line, "timestamp must be finite".into()));
        }
        let side = match &rec[1] {
            "A" => Side::Alice,
            "B" => Side::Bob,
            s => return Err(perr(line, format!("bad side {s:?}"))),
        };
        let origin = if with_origin {
            match &rec[4] {
                "" => None,
                "background" => Some(Origin::Background),
                s => {
                    let id = s
                        .strip_prefix("pair:")
                        .and_then(|id| id.parse().ok())
                        .ok_or_else(|| perr(line, format!("bad origin {s:?}")))?;
                    Some(Origin::Pair(id))
                }
            }
        } else {
            None
        };
        events.push(DetectionEvent {
            timestamp,
            side,
            x: bit(&rec[2], line)?,
            theta: bit(&rec[3], line)?,
            origin,
        });
    }
    Ok(events)
}
