//! Min-entropy from the BB84 uncertainty relation and the strong converse
//! exponent of the depolarizing channel.

use std::f64::consts::LN_2;

use super::optimize::{grid_then_golden, log_grid, Maximum};
use crate::codes::h;

/// Grid resolution for the `s` search before golden refinement.
const S_GRID: usize = 256;
/// Smallest `s` considered.
const S_MIN: f64 = 1e-9;
/// Range of `alpha - 1` for the strong converse search.
pub const ALPHA_MINUS_ONE_RANGE: (f64, f64) = (1e-6, 1e6);
const ALPHA_GRID: usize = 4000;

/// `g(s) = -(1/s) [log2(1 + 2^s) - 1 - s]`, the per-round entropy rate of the
/// uncertainty relation. Tends to 1/2 as `s -> 0` and equals `2 - log2 3` at 1.
pub fn uncertainty_rate(s: f64) -> f64 {
    // log2(1 + 2^s) - 1 = log2(1 + (2^s - 1) / 2), kept accurate for small s.
    let excess = ((s * LN_2).exp_m1() / 2.0).ln_1p() / LN_2;
    (s - excess) / s
}

fn s_grid() -> Vec<f64> {
    log_grid(S_MIN, 1.0, S_GRID)
}

/// `max_{s in (0, 1]} [rounds * g(s) - penalty / s]`.
pub fn max_over_s(rounds: f64, penalty: f64) -> Maximum {
    grid_then_golden(|s| rounds * uncertainty_rate(s) - penalty / s, &s_grid())
}

/// Smooth min-entropy of `rounds` uniformly encoded BB84 bits at smoothing
/// `eps`: `max_s [rounds * g(s) + (2 log2 eps - 1) / s]`.
pub fn classical_min_entropy(rounds: f64, eps: f64) -> f64 {
    max_over_s(rounds, 1.0 - 2.0 * eps.log2()).value
}

/// Same bound for an integer block of `n` rounds.
pub fn uncertainty_min_entropy(n: usize, eps: f64) -> f64 {
    classical_min_entropy(n as f64, eps)
}

/// Classical capacity-like quantity `C(alpha)` of the qubit depolarizing
/// channel that keeps the state with probability `r`.
pub fn depolarizing_capacity(r: f64, alpha: f64) -> f64 {
    let p = (1.0 + r) / 2.0;
    let (big, small) = if p >= 0.5 { (p, 1.0 - p) } else { (1.0 - p, p) };
    if alpha == f64::INFINITY {
        return 1.0 + big.log2();
    }
    let t = alpha - 1.0;
    if t <= 0.0 {
        return 1.0 - h(p);
    }
    // log2(p^a + q^a) = a log2 p + log2(1 + (q/p)^a), with p >= q.
    let log_sum = if small == 0.0 {
        alpha * big.log2()
    } else {
        alpha * big.log2() + ((small / big).powf(alpha)).ln_1p() / LN_2
    };
    1.0 + log_sum / t
}

/// `max_{alpha >= 1} ((alpha - 1)/alpha) (rate - C(alpha))`, clamped at zero.
/// The `alpha -> infinity` limit `rate - C(inf)` is included.
pub fn depolarizing_strong_converse(r: f64, rate: f64) -> f64 {
    let grid = log_grid(ALPHA_MINUS_ONE_RANGE.0, ALPHA_MINUS_ONE_RANGE.1, ALPHA_GRID);
    let exponent = |t: f64| {
        let alpha = 1.0 + t;
        (t / alpha) * (rate - depolarizing_capacity(r, alpha))
    };
    let best = grid_then_golden(exponent, &grid).value;
    let limit = rate - depolarizing_capacity(r, f64::INFINITY);
    best.max(limit).max(0.0)
}
