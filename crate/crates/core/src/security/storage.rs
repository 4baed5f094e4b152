//! What a dishonest Bob can learn given how many rounds he may claim lost,
//! how many rounds carried a single photon, and how much quantum memory he
//! has.

use super::entropy::{classical_min_entropy, depolarizing_strong_converse, max_over_s};
use super::optimize::{grid_then_golden, Maximum};
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StorageAssumption {
    /// A perfect memory of `qubits` qubits.
    Bounded { qubits: f64 },
    /// `qubits` qubits, each depolarized to keep the state with probability `r`.
    Depolarizing { qubits: f64, r: f64 },
}

impl StorageAssumption {
    pub fn qubits(&self) -> f64 {
        match *self {
            Self::Bounded { qubits } | Self::Depolarizing { qubits, .. } => qubits,
        }
    }

    pub fn with_qubits(self, qubits: f64) -> Self {
        match self {
            Self::Bounded { .. } => Self::Bounded { qubits },
            Self::Depolarizing { r, .. } => Self::Depolarizing { qubits, r },
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.qubits() >= 0.0 && self.qubits().is_finite()) {
            return Err(Error::Domain(format!("storage size {} must be nonnegative", self.qubits())));
        }
        if let Self::Depolarizing { r, .. } = *self {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Domain(format!("depolarizing parameter {r} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Source and detector probabilities relevant to a dishonest receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Erasures {
    pub p_sent_1: f64,
    /// Honest no-click probability after symmetrization.
    pub p_noclick_h: f64,
    pub p_noclick_d: f64,
}

/// Entropy accounting for a block of `n` bits sent with `epsilon` smoothing.
///
/// The signal count is `n / (1 - p_noclick_h)` and `zeta` uses base-2
/// logarithms. With these two choices the bounded and depolarizing storage
/// limits match the published experiment exactly; the smoothing budget
/// `epsilon / 2` goes to the uncertainty relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageModel {
    pub n: usize,
    pub epsilon: f64,
    pub erasures: Erasures,
}

/// A split of the smoothing budget between the uncertainty relation
/// (`eps_prime`) and the memory's decoding error (`eps_dprime`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub eps_prime: f64,
    pub eps_dprime: f64,
    /// `H(eps_prime) - log2(1 / eps_dprime)`, the bits Bob must push through
    /// his memory.
    pub exponent: f64,
}

impl StorageModel {
    pub fn signals(&self) -> f64 {
        self.n as f64 / (1.0 - self.erasures.p_noclick_h)
    }

    pub fn zeta(&self) -> f64 {
        ((2.0 / self.epsilon).log2() / (2.0 * self.signals())).sqrt()
    }

    /// Fraction of signals that certainly held one photon and were not
    /// reported lost.
    pub fn m_left1(&self) -> f64 {
        let e = &self.erasures;
        e.p_sent_1 - e.p_noclick_h + e.p_noclick_d - 3.0 * self.zeta()
    }

    pub fn m_frac(&self) -> f64 {
        1.0 - self.erasures.p_noclick_h - self.zeta()
    }

    /// Rounds whose BB84 uncertainty counts toward Bob's ignorance.
    pub fn single_photon_rounds(&self) -> f64 {
        self.m_left1() * self.signals()
    }

    fn check(&self) -> Result<(), Error> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Domain(format!("epsilon {} must lie in (0, 1)", self.epsilon)));
        }
        if !(0.0..1.0).contains(&self.erasures.p_noclick_h) {
            return Err(Error::Domain("no-click probability must lie in [0, 1)".into()));
        }
        if !(self.m_left1() > 0.0) {
            return Err(Error::Infeasible(format!(
                "no single-photon rounds survive (m_left1 = {})",
                self.m_left1()
            )));
        }
        if !(self.m_frac() > 0.0) {
            return Err(Error::Infeasible("no rounds survive truncation".into()));
        }
        Ok(())
    }

    /// Smooth min-entropy of the single-photon rounds, before storage.
    pub fn smooth_entropy(&self, eps: f64) -> Result<f64, Error> {
        self.check()?;
        Ok(classical_min_entropy(self.single_photon_rounds(), eps))
    }

    /// Bits the block must retain for security at threshold `lambda_hat`.
    pub fn target_bits(&self, lambda_hat: f64) -> f64 {
        lambda_hat * self.m_frac() * self.signals()
    }

    /// Best split of `epsilon / 2` for a depolarizing memory.
    pub fn optimal_split(&self) -> Result<Split, Error> {
        self.check()?;
        Ok(optimal_split(self.single_photon_rounds(), self.epsilon / 2.0))
    }

    /// Bob's smooth min-entropy about the block given his memory.
    pub fn min_entropy(&self, storage: &StorageAssumption) -> Result<f64, Error> {
        storage.validate()?;
        match *storage {
            StorageAssumption::Bounded { qubits } => Ok(self.smooth_entropy(self.epsilon / 2.0)? - qubits),
            StorageAssumption::Depolarizing { qubits, r } => {
                let split = self.optimal_split()?;
                Ok(noisy_from_exponent(split.exponent, qubits, r))
            }
        }
    }

    /// Min-entropy rate per kept bit.
    pub fn rate(&self, storage: &StorageAssumption) -> Result<f64, Error> {
        Ok(self.min_entropy(storage)? / (self.m_frac() * self.signals()))
    }

    /// Largest integer storage size with rate strictly above `lambda_hat`,
    /// or `None` if even an empty memory is insecure.
    pub fn max_storage(&self, storage: &StorageAssumption, lambda_hat: f64) -> Result<Option<u64>, Error> {
        let target = self.target_bits(lambda_hat);
        match *storage {
            StorageAssumption::Bounded { .. } => {
                let slack = self.smooth_entropy(self.epsilon / 2.0)? - target;
                if slack <= 0.0 {
                    return Ok(None);
                }
                Ok(Some(slack.ceil() as u64 - 1))
            }
            StorageAssumption::Depolarizing { r, .. } => {
                storage.validate()?;
                let exponent = self.optimal_split()?.exponent;
                // S * gamma(x / S) is a perspective of a convex function with
                // gamma(0) = 0, hence nonincreasing in S.
                let secure = |s: u64| noisy_from_exponent(exponent, s as f64, r) > target;
                if !secure(0) {
                    return Ok(None);
                }
                let mut hi = 1u64;
                while secure(hi) {
                    hi = hi.checked_mul(2).ok_or_else(|| Error::Infeasible("unbounded storage".into()))?;
                }
                let mut lo = hi / 2;
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if secure(mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(Some(lo))
            }
        }
    }
}

/// `lambda = (m_left1 * L - S / M) / m_frac`, with `L` the per-round smooth
/// min-entropy of the single-photon rounds at smoothing `epsilon / 2`.
pub fn bounded_storage_rate(model: &StorageModel, qubits: f64) -> Result<f64, Error> {
    let per_round = model.smooth_entropy(model.epsilon / 2.0)? / model.single_photon_rounds();
    Ok((model.m_left1() * per_round - qubits / model.signals()) / model.m_frac())
}

/// `S * gamma((H - log2(1/eps_dprime)) / S)` for a memory of `qubits`
/// depolarizing qubits, where `h_classical` was smoothed with the other
/// part of the budget. An empty memory leaves the full exponent.
pub fn noisy_storage_entropy(h_classical: f64, qubits: f64, r: f64, eps_dprime: f64) -> f64 {
    noisy_from_exponent(h_classical - (1.0 / eps_dprime).log2(), qubits, r)
}

/// Depolarizing entropy for a precomputed exponent `H - log2(1/eps_dprime)`.
pub fn noisy_from_exponent(exponent: f64, qubits: f64, r: f64) -> f64 {
    if qubits == 0.0 {
        return exponent.max(0.0);
    }
    qubits * depolarizing_strong_converse(r, exponent / qubits)
}

/// Fractions of the budget tried before refinement.
const SPLIT_GRID: usize = 64;

/// Maximizes `H(rounds, f * budget) - log2(1 / ((1 - f) * budget))` over the
/// fraction `f`. The depolarizing entropy is increasing in this exponent,
/// so the optimal split does not depend on the memory.
pub fn optimal_split(rounds: f64, budget: f64) -> Split {
    let grid: Vec<f64> = (1..SPLIT_GRID).map(|i| i as f64 / SPLIT_GRID as f64).collect();
    let objective = |f: f64| {
        classical_min_entropy(rounds, f * budget) - (1.0 / ((1.0 - f) * budget)).log2()
    };
    // The optimum often sits close to f = 1; refine there in log(1 - f).
    let coarse: Maximum = grid_then_golden(objective, &grid);
    let tail: Vec<f64> = super::optimize::log_grid(1e-6, 1.0 / SPLIT_GRID as f64, 40);
    let fine = grid_then_golden(|u| objective(1.0 - u), &tail);
    let f = if fine.value > coarse.value { 1.0 - fine.arg } else { coarse.arg };
    Split {
        eps_prime: f * budget,
        eps_dprime: (1.0 - f) * budget,
        exponent: objective(f),
    }
}

/// `max_s [g(s) - 3 eps / s]`, the per-round rate used by the signal-count
/// conditions.
pub fn smoothed_rate(epsilon: f64) -> f64 {
    max_over_s(1.0, 3.0 * epsilon).value
}

#[cfg(test)]
mod tests {
    use super::*;

    fn experiment() -> StorageModel {
        StorageModel {
            n: 250_000,
            epsilon: 0.99e-5,
            erasures: Erasures {
                p_sent_1: 0.125,
                p_noclick_h: 0.909,
                p_noclick_d: 0.875,
            },
        }
    }

    #[test]
    fn experiment_intermediates() {
        let m = experiment();
        assert!((m.signals() - 2_747_252.747).abs() < 1e-2);
        assert!((m.zeta() - 0.001_790_975_6).abs() < 1e-9);
        assert!((m.single_photon_rounds() - 235_239.21).abs() < 0.05);
        assert!((m.target_bits(1.0 - 0.531 + 2.0 * (1.0 / 0.99e-5f64).log2() / 250_000.0) - 114_974.99).abs() < 0.05);
    }

    #[test]
    fn rate_decreases_with_storage() {
        let m = experiment();
        let r0 = bounded_storage_rate(&m, 0.0).unwrap();
        let r1 = bounded_storage_rate(&m, 1.0).unwrap();
        let r2 = bounded_storage_rate(&m, 500.0).unwrap();
        assert!(r0 > r1 && r1 > r2);
        let via_entropy = m.rate(&StorageAssumption::Bounded { qubits: 500.0 }).unwrap();
        assert!((r2 - via_entropy).abs() < 1e-12);
    }

    #[test]
    fn huge_memory_leaves_nothing() {
        let v = noisy_storage_entropy(1000.0, 1e12, 0.9, 1e-6);
        assert!(v.abs() < 1e-6);
    }

    #[test]
    fn noiseless_memory_subtracts() {
        for (h, s) in [(5000.0, 100.0), (5000.0, 4900.0), (2e5, 972.0)] {
            let noisy = noisy_storage_entropy(h, s, 1.0, 1e-6);
            let bounded = (h - (1e6f64).log2() - s).max(0.0);
            assert!((noisy - bounded).abs() < 1e-9, "{noisy} vs {bounded}");
        }
    }

    #[test]
    fn infeasible_erasures() {
        let mut m = experiment();
        m.erasures.p_noclick_d = 0.0;
        assert!(matches!(m.smooth_entropy(1e-5), Err(Error::Infeasible(_))));
    }

    #[test]
    fn smoothed_rate_near_half() {
        let l = smoothed_rate(1e-5);
        assert!(l < 0.5 && l > 0.49);
    }
}
