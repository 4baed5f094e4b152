//! Full security verdicts and sweeps over two parameters.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::conditions::{signals_required, SignalRequirement};
use super::params::{block_params, lambda_threshold, max_rate, required_distance, total_error};
use super::storage::{noisy_from_exponent, Erasures, StorageAssumption, StorageModel};
use crate::error::Error;

/// Everything a verdict depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionParams {
    pub n: usize,
    pub epsilon: f64,
    /// Failure probability allowed for the random code; also enters `R_max`.
    pub eps_code: f64,
    pub p_sent_1: f64,
    pub p_noclick_h: f64,
    pub p_noclick_d: f64,
    pub p_err: f64,
    pub storage: StorageAssumption,
    /// Code rate in use. `None` takes the largest admissible rate.
    pub rate: Option<f64>,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for RegionParams {
    fn default() -> Self {
        Self {
            n: 250_000,
            epsilon: 3e-4,
            eps_code: 3e-4,
            p_sent_1: 1.0,
            p_noclick_h: 0.0,
            p_noclick_d: 0.0,
            p_err: 0.0,
            storage: StorageAssumption::Depolarizing { qubits: 0.0, r: 0.9 },
            rate: None,
            beta: 0.005,
            gamma: 0.001,
        }
    }
}

impl RegionParams {
    pub fn erasures(&self) -> Erasures {
        Erasures {
            p_sent_1: self.p_sent_1,
            p_noclick_h: self.p_noclick_h,
            p_noclick_d: self.p_noclick_d,
        }
    }

    pub fn model(&self) -> StorageModel {
        StorageModel {
            n: self.n,
            epsilon: self.epsilon,
            erasures: self.erasures(),
        }
    }

    pub fn with(mut self, axis: Axis, value: f64) -> Self {
        match axis {
            Axis::PSent1 => self.p_sent_1 = value,
            Axis::PNoclickH => self.p_noclick_h = value,
            Axis::PNoclickD => self.p_noclick_d = value,
            Axis::PErr => self.p_err = value,
            Axis::Storage => self.storage = self.storage.with_qubits(value),
        }
        self
    }

    pub fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::PSent1 => self.p_sent_1,
            Axis::PNoclickH => self.p_noclick_h,
            Axis::PNoclickD => self.p_noclick_d,
            Axis::PErr => self.p_err,
            Axis::Storage => self.storage.qubits(),
        }
    }

    fn check(&self) -> Result<(), Error> {
        self.storage.validate()?;
        for (name, v) in [
            ("p_sent_1", self.p_sent_1),
            ("p_noclick_h", self.p_noclick_h),
            ("p_noclick_d", self.p_noclick_d),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if !(0.0..0.5).contains(&self.p_err) {
            return Err(Error::Domain(format!("p_err {} must lie in [0, 1/2)", self.p_err)));
        }
        if !(self.eps_code > 0.0 && self.eps_code < 1.0) {
            return Err(Error::Domain(format!("eps_code {} must lie in (0, 1)", self.eps_code)));
        }
        if let Some(r) = self.rate {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Domain(format!("code rate {r} must lie in (0, 1)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecurityVerdict {
    /// Hiding holds (`lambda > lambda_hat`) and the code rate is admissible.
    pub secure: bool,
    /// Achieved min-entropy rate; `-inf` when no single-photon rounds remain.
    pub lambda: f64,
    pub lambda_hat: f64,
    /// `NaN` when no distance below `1/2` binds at this error rate.
    pub delta_min: f64,
    pub r_max: f64,
    /// `R_max - R`; zero when the largest admissible rate is used.
    pub binding_margin: f64,
    pub total_error: f64,
    /// Signal-count requirement from the closed-form thresholds, when the
    /// parameters are in its range.
    pub signals: Option<SignalRequirement>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Binding {
    delta_min: f64,
    r_max: f64,
    rate: f64,
    lambda_hat: f64,
}

fn binding(p: &RegionParams) -> Result<Binding, Error> {
    let block = block_params(p.epsilon, p.n)?;
    match required_distance(&block, p.p_err) {
        Ok(delta_min) => {
            let r_max = max_rate(delta_min, p.n, p.eps_code)?;
            let rate = p.rate.unwrap_or(r_max);
            Ok(Binding {
                delta_min,
                r_max,
                rate,
                lambda_hat: lambda_threshold(rate, p.n, p.epsilon),
            })
        }
        Err(Error::Infeasible(_)) => Ok(Binding {
            delta_min: f64::NAN,
            r_max: f64::NAN,
            rate: p.rate.unwrap_or(f64::NAN),
            lambda_hat: f64::INFINITY,
        }),
        Err(e) => Err(e),
    }
}

/// Storage-independent part of the hiding side for one erasure setting.
#[derive(Debug, Clone, Copy, PartialEq)]
enum EntropyBase {
    Infeasible,
    /// Smooth min-entropy before storage, and the kept-bit count.
    Bounded { entropy: f64, kept: f64 },
    /// Optimal split exponent, and the kept-bit count.
    Noisy { exponent: f64, kept: f64 },
}

fn entropy_base(p: &RegionParams) -> Result<EntropyBase, Error> {
    let model = p.model();
    let kept = model.m_frac() * model.signals();
    let base = match p.storage {
        StorageAssumption::Bounded { .. } => model
            .smooth_entropy(p.epsilon / 2.0)
            .map(|entropy| EntropyBase::Bounded { entropy, kept }),
        StorageAssumption::Depolarizing { .. } => model
            .optimal_split()
            .map(|s| EntropyBase::Noisy { exponent: s.exponent, kept }),
    };
    match base {
        Ok(b) => Ok(b),
        Err(Error::Infeasible(_)) => Ok(EntropyBase::Infeasible),
        Err(e) => Err(e),
    }
}

fn lambda_from(base: EntropyBase, storage: &StorageAssumption) -> f64 {
    match (base, *storage) {
        (EntropyBase::Infeasible, _) => f64::NEG_INFINITY,
        (EntropyBase::Bounded { entropy, kept }, s) => (entropy - s.qubits()) / kept,
        (EntropyBase::Noisy { exponent, kept }, StorageAssumption::Depolarizing { qubits, r }) => {
            noisy_from_exponent(exponent, qubits, r) / kept
        }
        (EntropyBase::Noisy { .. }, StorageAssumption::Bounded { .. }) => unreachable!("base built for storage kind"),
    }
}

fn combine(p: &RegionParams, lambda: f64, b: Binding) -> SecurityVerdict {
    let admissible = b.rate > 0.0 && b.rate <= b.r_max;
    SecurityVerdict {
        secure: admissible && lambda > b.lambda_hat,
        lambda,
        lambda_hat: b.lambda_hat,
        delta_min: b.delta_min,
        r_max: b.r_max,
        binding_margin: b.r_max - b.rate,
        total_error: total_error(p.epsilon, p.eps_code),
        signals: signals_required(&p.erasures(), p.p_err, p.epsilon, p.storage.qubits(), p.beta, p.gamma).ok(),
    }
}

/// Runs the whole pipeline for one parameter point.
pub fn evaluate(p: &RegionParams) -> Result<SecurityVerdict, Error> {
    p.check()?;
    let base = entropy_base(p)?;
    Ok(combine(p, lambda_from(base, &p.storage), binding(p)?))
}

/// Achieved min-entropy rate alone.
pub fn achieved_lambda(p: &RegionParams) -> Result<f64, Error> {
    p.check()?;
    Ok(lambda_from(entropy_base(p)?, &p.storage))
}

/// Largest `p_err` at which the point stays secure, to within `1e-9`, or
/// `None` if it is insecure even without errors.
pub fn max_tolerable_p_err(p: &RegionParams) -> Result<Option<f64>, Error> {
    p.check()?;
    let lambda = achieved_lambda(p)?;
    let secure_at = |e: f64| -> Result<bool, Error> {
        let b = binding(&RegionParams { p_err: e, ..*p })?;
        Ok(b.rate > 0.0 && b.rate <= b.r_max && lambda > b.lambda_hat)
    };
    if !secure_at(0.0)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, 0.5 - 1e-12);
    if secure_at(hi)? {
        return Ok(Some(hi));
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if secure_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    PSent1,
    PNoclickH,
    PNoclickD,
    PErr,
    Storage,
}

impl Axis {
    pub const ALL: [Axis; 5] = [Axis::PSent1, Axis::PNoclickH, Axis::PNoclickD, Axis::PErr, Axis::Storage];

    pub fn name(self) -> &'static str {
        match self {
            Axis::PSent1 => "p_sent_1",
            Axis::PNoclickH => "p_noclick_h",
            Axis::PNoclickD => "p_noclick_d",
            Axis::PErr => "p_err",
            Axis::Storage => "storage",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown axis {s:?}")))
    }
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub axis: Axis,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl AxisSpec {
    pub fn new(axis: Axis, lo: f64, hi: f64, steps: usize) -> Self {
        Self { axis, lo, hi, steps }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.lo],
            k => (0..k)
                .map(|i| {
                    let t = i as f64 / (k - 1) as f64;
                    self.lo * (1.0 - t) + self.hi * t
                })
                .collect(),
        }
    }
}

/// `axis:lo:hi:steps`, for example `p_err:0:0.05:50`.
impl FromStr for AxisSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Domain(format!("axis spec {s:?} is not axis:lo:hi:steps"));
        if parts.len() != 4 {
            return Err(bad());
        }
        Ok(AxisSpec {
            axis: parts[0].parse()?,
            lo: parts[1].parse().map_err(|_| bad())?,
            hi: parts[2].parse().map_err(|_| bad())?,
            steps: parts[3].parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionCell {
    pub a1: f64,
    pub a2: f64,
    pub verdict: SecurityVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub axis1: AxisSpec,
    pub axis2: AxisSpec,
    /// Row-major: `axis1` outer, `axis2` inner.
    pub cells: Vec<RegionCell>,
}

type ErasureKey = [u64; 3];

fn erasure_key(p: &RegionParams) -> ErasureKey {
    [p.p_sent_1.to_bits(), p.p_noclick_h.to_bits(), p.p_noclick_d.to_bits()]
}

/// Evaluates every cell of the grid. The expensive entropy optimization runs
/// once per distinct erasure setting and the distance solve once per error
/// rate, so sweeps over `p_err` or storage size are cheap.
pub fn security_region(axis1: AxisSpec, axis2: AxisSpec, fixed: &RegionParams) -> Result<Region, Error> {
    if axis1.axis == axis2.axis {
        return Err(Error::Domain(format!("both axes are {}", axis1.axis)));
    }
    let points: Vec<(f64, f64, RegionParams)> = axis1
        .values()
        .into_iter()
        .flat_map(|a| axis2.values().into_iter().map(move |b| (a, b)))
        .map(|(a, b)| (a, b, fixed.with(axis1.axis, a).with(axis2.axis, b)))
        .collect();
    for (_, _, p) in &points {
        p.check()?;
    }

    let mut erasure_reps: HashMap<ErasureKey, RegionParams> = HashMap::new();
    let mut error_reps: HashMap<u64, RegionParams> = HashMap::new();
    for (_, _, p) in &points {
        erasure_reps.entry(erasure_key(p)).or_insert(*p);
        error_reps.entry(p.p_err.to_bits()).or_insert(*p);
    }
    let bases: HashMap<ErasureKey, EntropyBase> = erasure_reps
        .into_par_iter()
        .map(|(k, p)| entropy_base(&p).map(|b| (k, b)))
        .collect::<Result<_, _>>()?;
    let bindings: HashMap<u64, Binding> = error_reps
        .into_par_iter()
        .map(|(k, p)| binding(&p).map(|b| (k, b)))
        .collect::<Result<_, _>>()?;

    let cells = points
        .into_par_iter()
        .map(|(a1, a2, p)| {
            let lambda = lambda_from(bases[&erasure_key(&p)], &p.storage);
            RegionCell {
                a1,
                a2,
                verdict: combine(&p, lambda, bindings[&p.p_err.to_bits()]),
            }
        })
        .collect();
    Ok(Region { axis1, axis2, cells })
}

impl Region {
    /// For each `axis1` value, the smallest and largest secure `axis2`
    /// values, if any.
    pub fn secure_range(&self) -> Vec<(f64, Option<(f64, f64)>)> {
        self.cells
            .chunk_by(|x, y| x.a1 == y.a1)
            .map(|row| {
                let mut secure = row.iter().filter(|c| c.verdict.secure).map(|c| c.a2);
                let range = secure.next().map(|first| secure.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))));
                (row[0].a1, range)
            })
            .collect()
    }

    /// CSV with header `axis1,axis2,secure,lambda,lambda_hat`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis1,axis2,secure,lambda,lambda_hat\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.a1, c.a2, c.verdict.secure as u8, c.verdict.lambda, c.verdict.lambda_hat
            ));
        }
        out
    }
}
