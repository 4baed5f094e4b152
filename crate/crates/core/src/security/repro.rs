//! The five-step parameter derivation for the published experiment.

use super::params::{block_params, lambda_threshold, max_rate, required_distance, total_error};
use super::storage::{Erasures, StorageAssumption, StorageModel};
use crate::codes::gv_failure_bound;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentInputs {
    pub epsilon: f64,
    pub n: usize,
    pub p_err: f64,
    pub erasures: Erasures,
    pub rate: f64,
    pub eps_code: f64,
    pub r: f64,
}

impl ExperimentInputs {
    pub fn published() -> Self {
        Self {
            epsilon: 0.99e-5,
            n: 250_000,
            p_err: 0.0412,
            erasures: Erasures {
                p_sent_1: 0.125,
                p_noclick_h: 0.909,
                p_noclick_d: 0.875,
            },
            rate: 0.531,
            eps_code: 2e-7,
            r: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentReport {
    pub alpha1: f64,
    pub alpha2: f64,
    pub m: usize,
    pub delta_min: f64,
    pub r_max: f64,
    pub rate_admissible: bool,
    /// Random-code failure bound at the chosen rate and `delta_min`.
    pub code_failure: f64,
    pub lambda_hat: f64,
    pub signals: f64,
    pub s_bounded: Option<u64>,
    pub s_noisy: Option<u64>,
    pub total_error: f64,
}

impl ExperimentReport {
    /// `key value` lines in pipeline order.
    pub fn lines(&self) -> Vec<(&'static str, String)> {
        let opt = |s: Option<u64>| s.map_or("none".to_string(), |v| v.to_string());
        vec![
            ("alpha1", format!("{:.6e}", self.alpha1)),
            ("m", self.m.to_string()),
            ("alpha2", format!("{:.6e}", self.alpha2)),
            ("delta_min", format!("{:.6}", self.delta_min)),
            ("r_max", format!("{:.6}", self.r_max)),
            ("rate_admissible", self.rate_admissible.to_string()),
            ("code_failure", format!("{:.3e}", self.code_failure)),
            ("lambda_hat", format!("{:.6}", self.lambda_hat)),
            ("signals", format!("{:.0}", self.signals)),
            ("s_bounded", opt(self.s_bounded)),
            ("s_noisy", opt(self.s_noisy)),
            ("total_error", format!("{:.3e}", self.total_error)),
        ]
    }
}

/// Distance, rate, threshold, storage limits and total error in turn.
pub fn reproduce(inputs: &ExperimentInputs) -> Result<ExperimentReport, Error> {
    let block = block_params(inputs.epsilon, inputs.n)?;
    let delta_min = required_distance(&block, inputs.p_err)?;
    let r_max = max_rate(delta_min, inputs.n, inputs.eps_code)?;
    let lambda_hat = lambda_threshold(inputs.rate, inputs.n, inputs.epsilon);
    let model = StorageModel {
        n: inputs.n,
        epsilon: inputs.epsilon,
        erasures: inputs.erasures,
    };
    Ok(ExperimentReport {
        alpha1: block.alpha1,
        alpha2: block.alpha2,
        m: block.m,
        delta_min,
        r_max,
        rate_admissible: inputs.rate <= r_max,
        code_failure: gv_failure_bound(inputs.rate, delta_min, inputs.n),
        lambda_hat,
        signals: model.signals(),
        s_bounded: model.max_storage(&StorageAssumption::Bounded { qubits: 0.0 }, lambda_hat)?,
        s_noisy: model.max_storage(&StorageAssumption::Depolarizing { qubits: 0.0, r: inputs.r }, lambda_hat)?,
        total_error: total_error(inputs.epsilon, inputs.eps_code),
    })
}
