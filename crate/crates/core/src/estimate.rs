//! Protocol probabilities from measurable detection rates.
//!
//! The source is modelled as an ideal pair emitter at rate `r_s` feeding two
//! lossy arms (`eta_A`, `eta_B`) plus background on each side. Only the
//! singles rates, the coincidence rate and the window are observable, so the
//! estimator works with bounds that set the unobservable efficiencies to
//! their worst case.

use crate::error::Error;

/// Measured event rates, all in events per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceRates {
    /// Alice singles.
    pub r_a: f64,
    /// Bob singles.
    pub r_b: f64,
    /// Identified coincidences.
    pub r_p: f64,
    pub r_ba: f64,
    pub r_bb: f64,
    /// Coincidence window in seconds.
    pub tau_c: f64,
    /// Offset of the displaced window used to measure accidentals.
    pub tau_d: Option<f64>,
}

impl SourceRates {
    pub fn new(r_a: f64, r_b: f64, r_p: f64, tau_c: f64) -> Self {
        Self {
            r_a,
            r_b,
            r_p,
            r_ba: 0.0,
            r_bb: 0.0,
            tau_c,
            tau_d: None,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let all = [self.r_a, self.r_b, self.r_p, self.r_ba, self.r_bb];
        if all.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidRates("rates must be finite and nonnegative".into()));
        }
        if !(self.tau_c > 0.0 && self.tau_c.is_finite()) {
            return Err(Error::InvalidRates("coincidence window must be positive".into()));
        }
        if self.r_p > self.r_a.min(self.r_b) {
            return Err(Error::InvalidRates(format!(
                "coincidence rate {} exceeds singles rate min({}, {})",
                self.r_p, self.r_a, self.r_b
            )));
        }
        Ok(())
    }
}

/// The probabilities the security analysis consumes, all conditioned on
/// Alice registering a round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentalParams {
    /// No photon sent to Bob.
    pub p_sent_0: f64,
    /// Exactly one photon sent to Bob.
    pub p_sent_1: f64,
    /// More than one photon sent to Bob.
    pub p_sent_multi: f64,
    /// Honest Bob registers no valid click.
    pub p_noclick_h: f64,
    /// Dishonest Bob registers no click; equals `p_sent_0`.
    pub p_noclick_d: f64,
    /// Matched-basis bit error rate. Measured from data, never from rates.
    pub p_err: Option<f64>,
}

impl ExperimentalParams {
    pub fn with_p_err(mut self, p_err: f64) -> Self {
        self.p_err = Some(p_err);
        self
    }

    pub fn with_noclick(mut self, p_noclick_h: f64) -> Self {
        self.p_noclick_h = p_noclick_h;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        let probs = [
            ("p_sent_0", Some(self.p_sent_0)),
            ("p_sent_1", Some(self.p_sent_1)),
            ("p_sent_multi", Some(self.p_sent_multi)),
            ("p_noclick_h", Some(self.p_noclick_h)),
            ("p_noclick_d", Some(self.p_noclick_d)),
            ("p_err", self.p_err),
        ];
        for (name, p) in probs {
            if let Some(p) = p {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Domain(format!("{name} = {p} is not a probability")));
                }
            }
        }
        let sum = self.p_sent_0 + self.p_sent_1 + self.p_sent_multi;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("p_sent components sum to {sum}")));
        }
        Ok(())
    }
}

/// Upper bound on the accidental coincidence rate, assuming every detection
/// on both sides is uncorrelated.
pub fn accidental_rate_bound(r_a: f64, r_b: f64, tau_c: f64) -> f64 {
    r_a * r_b * tau_c
}

/// Bounds the protocol probabilities from observed rates.
///
/// `p_sent_0 <= 1 - r_p / r_A` comes from setting `eta_B = 1`; the
/// multi-photon bound uses `eta_A > r_p / r_B` and `eta_B > r_p / r_A`.
/// Accidentals are not subtracted from `r_p`; they are treated as a source
/// of bit errors instead.
pub fn estimate_probabilities(rates: &SourceRates) -> Result<ExperimentalParams, Error> {
    rates.validate()?;
    if rates.r_p == 0.0 {
        return Err(Error::InvalidRates("coincidence rate is zero".into()));
    }
    let detected_ratio = rates.r_p / rates.r_a;
    let p_sent_0 = 1.0 - detected_ratio;
    let p_sent_multi = accidental_rate_bound(rates.r_a, rates.r_b, rates.tau_c) / rates.r_p;
    let p_sent_1 = 1.0 - p_sent_0 - p_sent_multi;
    let p_noclick_h = 1.0 - detected_ratio;

    for (name, p) in [
        ("p_sent_0", p_sent_0),
        ("p_sent_multi", p_sent_multi),
        ("p_sent_1", p_sent_1),
    ] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidRates(format!("{name} = {p} outside [0, 1]")));
        }
    }

    Ok(ExperimentalParams {
        p_sent_0,
        p_sent_1,
        p_sent_multi,
        p_noclick_h,
        p_noclick_d: p_sent_0,
        p_err: None,
    })
}
