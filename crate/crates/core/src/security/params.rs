use crate::codes::h;
use crate::error::Error;

/// Finite-size parameters shared by the protocol checks and the analysis.
///
/// `zeta` bounds the deviation of the missing-round count, `alpha1` the
/// fraction of matching bases, `alpha2` the error count among `m` tested
/// bits. All three use natural logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityParams {
    pub epsilon: f64,
    /// Signals sent.
    pub signals: u64,
    /// Honest no-click probability the interval is centred on.
    pub p_noclick: f64,
    pub zeta: f64,
    /// Block length after truncation.
    pub n: usize,
    pub alpha1: f64,
    /// Matched-basis bits Bob keeps.
    pub m: usize,
    pub alpha2: f64,
}

fn check_epsilon(epsilon: f64) -> Result<(), Error> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon {epsilon} must lie in (0, 1)")));
    }
    Ok(())
}

fn zeta(epsilon: f64, signals: u64) -> f64 {
    ((2.0 / epsilon).ln() / (2.0 * signals as f64)).sqrt()
}

fn block_length(epsilon: f64, signals: u64, p_noclick: f64) -> f64 {
    ((1.0 - p_noclick - zeta(epsilon, signals)) * signals as f64).floor()
}

/// Derives every finite-size parameter from `epsilon`, the number of
/// signals and the honest no-click probability.
pub fn derive_params(epsilon: f64, signals: u64, p_noclick: f64) -> Result<SecurityParams, Error> {
    check_epsilon(epsilon)?;
    if signals == 0 {
        return Err(Error::Domain("at least one signal is required".into()));
    }
    if !(0.0..1.0).contains(&p_noclick) {
        return Err(Error::Domain(format!("no-click probability {p_noclick} must lie in [0, 1)")));
    }
    let zeta = zeta(epsilon, signals);
    let n = block_length(epsilon, signals, p_noclick);
    if n < 1.0 {
        return Err(Error::Infeasible(format!(
            "{signals} signals leave no rounds at no-click probability {p_noclick}"
        )));
    }
    let n = n as usize;
    let alpha1 = ((1.0 / epsilon).ln() / (2.0 * n as f64)).sqrt();
    let m = ((0.5 - alpha1) * n as f64).floor();
    if m < 1.0 {
        return Err(Error::Infeasible(format!("block length {n} keeps no tested bits")));
    }
    let m = m as usize;
    let alpha2 = ((2.0 / epsilon).ln() / (2.0 * m as f64)).sqrt();
    Ok(SecurityParams {
        epsilon,
        signals,
        p_noclick,
        zeta,
        n,
        alpha1,
        m,
        alpha2,
    })
}

/// Smallest signal count whose derived block length reaches `n`. The block
/// length grows by less than one per extra signal, so it hits `n` exactly.
pub fn for_block_length(epsilon: f64, n: usize, p_noclick: f64) -> Result<SecurityParams, Error> {
    check_epsilon(epsilon)?;
    if n == 0 || !(0.0..1.0).contains(&p_noclick) {
        return Err(Error::Domain("need n >= 1 and a no-click probability below 1".into()));
    }
    let reaches = |signals: u64| block_length(epsilon, signals, p_noclick) >= n as f64;
    let mut hi = ((n as f64 / (1.0 - p_noclick)).ceil() as u64).max(1);
    while !reaches(hi) {
        hi = hi.checked_mul(2).ok_or_else(|| Error::Infeasible("signal count overflow".into()))?;
    }
    let mut lo = 0u64;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let params = derive_params(epsilon, hi, p_noclick)?;
    debug_assert_eq!(params.n, n);
    Ok(params)
}

/// Block-only variant for analyses that fix `n` directly.
pub fn block_params(epsilon: f64, n: usize) -> Result<SecurityParams, Error> {
    check_epsilon(epsilon)?;
    let alpha1 = ((1.0 / epsilon).ln() / (2.0 * n as f64)).sqrt();
    let m = ((0.5 - alpha1) * n as f64).floor();
    if m < 1.0 {
        return Err(Error::Infeasible(format!("block length {n} keeps no tested bits")));
    }
    let m = m as usize;
    Ok(SecurityParams {
        epsilon,
        signals: 0,
        p_noclick: f64::NAN,
        zeta: f64::NAN,
        n,
        alpha1,
        m,
        alpha2: ((2.0 / epsilon).ln() / (2.0 * m as f64)).sqrt(),
    })
}

impl SecurityParams {
    /// `sqrt(ln(1/eps) / d)` for minimum distance `d`.
    pub fn alpha3(&self, distance: f64) -> f64 {
        ((1.0 / self.epsilon).ln() / distance).sqrt()
    }

    /// Inclusive bounds on the number of missing rounds Alice tolerates.
    pub fn missing_interval(&self) -> (u64, u64) {
        let m = self.signals as f64;
        (
            ((self.p_noclick - self.zeta) * m).floor().max(0.0) as u64,
            ((self.p_noclick + self.zeta) * m).ceil() as u64,
        )
    }

    /// Inclusive bounds on disagreements among the `m` tested bits.
    pub fn error_interval(&self, p_err: f64) -> (usize, usize) {
        let m = self.m as f64;
        (
            ((p_err - self.alpha2) * m).floor().max(0.0) as usize,
            ((p_err + self.alpha2) * m).ceil() as usize,
        )
    }

    /// Right-hand side of the distance condition at relative distance `delta`.
    pub fn distance_condition(&self, p_err: f64, delta: f64) -> f64 {
        let alpha3 = self.alpha3(delta * self.n as f64);
        2.0 * (p_err + self.alpha2) * (0.5 - self.alpha1) / (0.5 - alpha3)
    }
}

/// Smallest relative distance `delta` with
/// `delta >= 2 (p_err + alpha2)(1/2 - alpha1) / (1/2 - alpha3(delta n))`.
///
/// The right side decreases in `delta`, so the gap is increasing and its
/// root is found by bisection.
pub fn required_distance(params: &SecurityParams, p_err: f64) -> Result<f64, Error> {
    if !(0.0..0.5).contains(&p_err) {
        return Err(Error::Domain(format!("p_err {p_err} must lie in [0, 1/2)")));
    }
    let n = params.n as f64;
    let gap = |d: f64| {
        let alpha3 = params.alpha3(d * n);
        if alpha3 >= 0.5 {
            f64::NEG_INFINITY
        } else {
            d - params.distance_condition(p_err, d)
        }
    };
    let floor = 4.0 * (p_err + params.alpha2) * (0.5 - params.alpha1);
    let alpha3_pole = 4.0 * (1.0 / params.epsilon).ln() / n;
    let mut lo = floor.max(alpha3_pole);
    let mut hi = 0.5;
    if lo >= hi || gap(hi) < 0.0 {
        return Err(Error::Infeasible(format!(
            "no relative distance below 1/2 satisfies the binding condition at p_err {p_err}"
        )));
    }
    if gap(lo) >= 0.0 {
        return Ok(lo);
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Largest admissible code rate: `1 - h(delta) - log2(1/eps_code) / n`.
pub fn max_rate(delta: f64, n: usize, eps_code: f64) -> Result<f64, Error> {
    if !(0.0..=0.5).contains(&delta) {
        return Err(Error::Domain(format!("delta {delta} must lie in [0, 1/2]")));
    }
    Ok(1.0 - h(delta) - (1.0 / eps_code).log2() / n as f64)
}

/// Min-entropy rate a code of rate `rate` needs to hide the bit:
/// `1 - R + 2 log2(1/eps) / n`.
pub fn lambda_threshold(rate: f64, n: usize, epsilon: f64) -> f64 {
    1.0 - rate + 2.0 * (1.0 / epsilon).log2() / n as f64
}

/// Threshold at the largest admissible rate for `delta`:
/// `h(delta) + [log2(1/eps_code) + 2 log2(1/eps)] / n`.
pub fn lambda_required(delta: f64, n: usize, epsilon: f64, eps_code: f64) -> Result<f64, Error> {
    Ok(lambda_threshold(max_rate(delta, n, eps_code)?, n, epsilon))
}

/// Total execution error `2 eps + eps_code`.
pub fn total_error(epsilon: f64, eps_code: f64) -> f64 {
    2.0 * epsilon + eps_code
}

/// Error budget per security property, each a multiple of `epsilon` plus
/// the random-code failure probability where it applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorLedger {
    pub epsilon: f64,
    pub eps_code: f64,
}

/// One row: `eps_multiple * epsilon + code_multiple * eps_code`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub property: &'static str,
    pub eps_multiple: u32,
    pub code_multiple: u32,
}

impl ErrorLedger {
    pub const ROWS: [LedgerRow; 4] = [
        LedgerRow {
            property: "correctness",
            eps_multiple: 2,
            code_multiple: 0,
        },
        LedgerRow {
            property: "binding",
            eps_multiple: 2,
            code_multiple: 1,
        },
        LedgerRow {
            property: "hiding",
            eps_multiple: 2,
            code_multiple: 0,
        },
        LedgerRow {
            property: "execution",
            eps_multiple: 2,
            code_multiple: 1,
        },
    ];

    pub fn value(&self, row: &LedgerRow) -> f64 {
        row.eps_multiple as f64 * self.epsilon + row.code_multiple as f64 * self.eps_code
    }

    /// With `eps_code = epsilon` the execution row is `3 epsilon`.
    pub fn execution(&self) -> f64 {
        self.value(&Self::ROWS[3])
    }
}
