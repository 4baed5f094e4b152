use super::storage::{smoothed_rate, Erasures};
use crate::codes::h;
use crate::error::Error;

/// Signal counts that make a commitment secure against a bounded memory,
/// using the closed-form distance and entropy thresholds in `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalRequirement {
    pub m2: f64,
    pub m3: f64,
    pub l_prime: f64,
    pub delta: f64,
    pub lambda_hat: f64,
    pub m_bounds: [f64; 3],
    /// `None` when the entropy margin `m2 L' - m3 lambda_hat` is not positive.
    pub m_storage: Option<f64>,
    pub feasible: bool,
}

impl SignalRequirement {
    /// `max(M1, M2, M3, M4)`, or `None` when infeasible.
    pub fn required(&self) -> Option<f64> {
        let m4 = self.m_storage?;
        Some(self.m_bounds.iter().copied().fold(m4, f64::max))
    }

    pub fn margin(&self) -> f64 {
        self.m2 * self.l_prime - self.m3 * self.lambda_hat
    }
}

/// Relative distance the code needs: `2 (p_err + beta/sqrt(1-2 beta)) / (1 - 4 sqrt(5) beta)`.
pub fn beta_distance(p_err: f64, beta: f64) -> f64 {
    2.0 * (p_err + beta / (1.0 - 2.0 * beta).sqrt()) / (1.0 - 4.0 * 5f64.sqrt() * beta)
}

/// `M1..M4` with base-2 logarithms.
pub fn signals_required(
    erasures: &Erasures,
    p_err: f64,
    epsilon: f64,
    qubits: f64,
    beta: f64,
    gamma: f64,
) -> Result<SignalRequirement, Error> {
    for (name, v) in [("beta", beta), ("gamma", gamma)] {
        if !(v > 0.0 && v <= 0.01) {
            return Err(Error::Domain(format!("{name} = {v} must lie in (0, 0.01]")));
        }
    }
    if !(epsilon > 0.0 && epsilon < 1.0) || qubits < 0.0 {
        return Err(Error::Domain("need epsilon in (0, 1) and nonnegative storage".into()));
    }
    let m2 = erasures.p_sent_1 - erasures.p_noclick_h + erasures.p_noclick_d - 3.0 * gamma;
    let m3 = 1.0 - erasures.p_noclick_h;
    let l_prime = smoothed_rate(epsilon);
    let delta = beta_distance(p_err, beta);
    let lambda_hat = if delta < 0.5 { h(delta) + 3.0 * beta * beta } else { f64::INFINITY };
    let m_bounds = [
        (2.0 / epsilon).log2() / (2.0 * gamma * gamma),
        (1.0 / epsilon).log2() / (epsilon * m2),
        (2.0 / epsilon).log2() / ((m3 - gamma) * beta * beta),
    ];
    let margin = m2 * l_prime - m3 * lambda_hat;
    let feasible = margin > 0.0 && m2 > 0.0 && m3 > gamma;
    Ok(SignalRequirement {
        m2,
        m3,
        l_prime,
        delta,
        lambda_hat,
        m_bounds,
        m_storage: feasible.then(|| qubits / margin),
        feasible,
    })
}
