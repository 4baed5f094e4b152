//! Random binary linear codes described by their parity-check matrix.
//!
//! `H` is stored with one row per check, so `H` has `n - k` rows of `n` bits
//! and the syndrome bit `w_j` is the parity of `x AND row_j`. This is the
//! transpose of the `x * H` convention with `H` of size `n x (n - k)`; both
//! produce the same bits.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::bits::{parity_and, BitString};
use crate::error::Error;

pub const CODE_MAGIC: &[u8; 8] = b"BCNSCODE";
pub const CODE_VERSION: u8 = 1;
/// Largest block length [`min_distance_bruteforce`] accepts.
pub const BRUTEFORCE_MAX_N: usize = 28;

/// Anything that can compute a syndrome.
pub trait ParityCheck: Sync {
    fn n(&self) -> usize;
    fn k(&self) -> usize;
    fn syndrome(&self, x: &BitString) -> Result<BitString, Error>;

    fn redundancy(&self) -> usize {
        self.n() - self.k()
    }

    fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct LinearCode {
    n: usize,
    k: usize,
    rows: Vec<BitString>,
}

impl std::fmt::Debug for LinearCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LinearCode[{}, {}]", self.n, self.k)
    }
}

fn check_dims(n: usize, k: usize) -> Result<(), Error> {
    if k == 0 || k >= n {
        return Err(Error::InvalidCode { n, k });
    }
    Ok(())
}

/// Fills `n - k` rows of `n` uniform bits from a ChaCha20 stream seeded with
/// `seed`, row by row.
pub fn generate_parity_check(n: usize, k: usize, seed: u64) -> Result<LinearCode, Error> {
    check_dims(n, k)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let rows = (0..n - k).map(|_| BitString::random(n, &mut rng)).collect();
    Ok(LinearCode { n, k, rows })
}

impl LinearCode {
    /// Builds a code from explicit check rows. `rows.len()` fixes `n - k`.
    pub fn from_rows(n: usize, rows: Vec<BitString>) -> Result<Self, Error> {
        let k = n.checked_sub(rows.len()).ok_or(Error::InvalidCode { n, k: 0 })?;
        check_dims(n, k)?;
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: bad.len(),
            });
        }
        Ok(Self { n, k, rows })
    }

    pub fn rows(&self) -> &[BitString] {
        &self.rows
    }

    /// Column `i` of `H` packed into a word, bit `j` from row `j`.
    fn column_masks(&self) -> Result<Vec<u64>, Error> {
        if self.rows.len() > 64 {
            return Err(Error::CodeTooLarge {
                n: self.n,
                max: BRUTEFORCE_MAX_N,
            });
        }
        Ok((0..self.n)
            .map(|i| {
                self.rows
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (j, r)| acc | ((r.get(i) as u64) << j))
            })
            .collect())
    }

    /// True if every column of `H` is nonzero, so any single flip changes
    /// the syndrome.
    pub fn columns_nonzero(&self) -> bool {
        let mut any = vec![0u64; self.n.div_ceil(64)];
        for r in &self.rows {
            for (a, w) in any.iter_mut().zip(r.words()) {
                *a |= w;
            }
        }
        BitString::from_words(self.n, any).weight() == self.n
    }

    /// Serializes to the code file format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let row_bytes = self.n.div_ceil(8);
        let mut out = Vec::with_capacity(17 + row_bytes * self.rows.len());
        out.extend_from_slice(CODE_MAGIC);
        out.push(CODE_VERSION);
        out.extend_from_slice(&(self.n as u32).to_be_bytes());
        out.extend_from_slice(&(self.k as u32).to_be_bytes());
        for r in &self.rows {
            out.extend_from_slice(&r.to_bytes());
        }
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self, Error> {
        let bad = |m: &str| Error::CodeFile(m.to_string());
        if data.len() < 17 {
            return Err(bad("truncated header"));
        }
        if &data[..8] != CODE_MAGIC {
            return Err(bad("bad magic"));
        }
        if data[8] != CODE_VERSION {
            return Err(Error::CodeFile(format!("unsupported version {}", data[8])));
        }
        let n = u32::from_be_bytes(data[9..13].try_into().unwrap()) as usize;
        let k = u32::from_be_bytes(data[13..17].try_into().unwrap()) as usize;
        check_dims(n, k)?;
        let row_bytes = n.div_ceil(8);
        let body = &data[17..];
        let expected = row_bytes
            .checked_mul(n - k)
            .ok_or_else(|| bad("dimensions overflow"))?;
        if body.len() != expected {
            return Err(Error::CodeFile(format!(
                "body has {} bytes, expected {expected}",
                body.len()
            )));
        }
        let rows = body
            .chunks(row_bytes)
            .map(|c| BitString::from_bytes(n, c))
            .collect::<Result<_, _>>()?;
        Ok(Self { n, k, rows })
    }
}

impl ParityCheck for LinearCode {
    fn n(&self) -> usize {
        self.n
    }

    fn k(&self) -> usize {
        self.k
    }

    fn syndrome(&self, x: &BitString) -> Result<BitString, Error> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok(self.rows.iter().map(|r| parity_and(r.words(), x.words())).collect())
    }
}

/// A code identified only by its generator seed. Rows are regenerated on
/// every syndrome, so codes far too large to hold in memory still work.
/// Produces the same bits as [`generate_parity_check`] with the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededCode {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
}

impl SeededCode {
    pub fn new(n: usize, k: usize, seed: u64) -> Result<Self, Error> {
        check_dims(n, k)?;
        Ok(Self { n, k, seed })
    }

    pub fn materialize(&self) -> LinearCode {
        generate_parity_check(self.n, self.k, self.seed).expect("dimensions checked")
    }
}

impl ParityCheck for SeededCode {
    fn n(&self) -> usize {
        self.n
    }

    fn k(&self) -> usize {
        self.k
    }

    fn syndrome(&self, x: &BitString) -> Result<BitString, Error> {
        const ROWS_PER_TASK: usize = 256;
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        let words = self.n.div_ceil(64);
        let rows = self.n - self.k;
        let base = ChaCha20Rng::seed_from_u64(self.seed);
        let tail = if self.n % 64 == 0 {
            u64::MAX
        } else {
            (1u64 << (self.n % 64)) - 1
        };
        let bits: Vec<bool> = (0..rows.div_ceil(ROWS_PER_TASK))
            .into_par_iter()
            .flat_map_iter(|task| {
                let mut rng = base.clone();
                // Each u64 consumes two 32-bit words of the stream.
                rng.set_word_pos((task * ROWS_PER_TASK * words * 2) as u128);
                let end = ((task + 1) * ROWS_PER_TASK).min(rows);
                let mut out = Vec::with_capacity(end - task * ROWS_PER_TASK);
                for _ in task * ROWS_PER_TASK..end {
                    let mut acc = 0u64;
                    for (i, xw) in x.words().iter().enumerate() {
                        let mut w = rng.next_u64();
                        if i + 1 == words {
                            w &= tail;
                        }
                        acc ^= w & xw;
                    }
                    out.push(acc.count_ones() & 1 == 1);
                }
                out
            })
            .collect();
        Ok(BitString::from_bits(bits))
    }
}

/// Minimum weight of a nonzero `x` with zero syndrome, by Gray-code
/// enumeration of all `2^n` inputs. Returns `n + 1` if only the zero word
/// has zero syndrome.
pub fn min_distance_bruteforce(code: &LinearCode) -> Result<usize, Error> {
    if code.n > BRUTEFORCE_MAX_N {
        return Err(Error::CodeTooLarge {
            n: code.n,
            max: BRUTEFORCE_MAX_N,
        });
    }
    let cols = code.column_masks()?;
    let mut syn = 0u64;
    let mut x = 0u64;
    let mut best = code.n + 1;
    for step in 1u64..(1u64 << code.n) {
        let bit = step.trailing_zeros() as usize;
        x ^= 1 << bit;
        syn ^= cols[bit];
        if syn == 0 {
            best = best.min(x.count_ones() as usize);
        }
    }
    Ok(best)
}

/// `h(x) = -x log2 x - (1-x) log2(1-x)`, with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64, Error> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("binary entropy of {x}")));
    }
    Ok(h(x))
}

/// Unchecked binary entropy for internal callers with validated inputs.
pub(crate) fn h(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Capacity of the binary symmetric channel with flip probability `p`.
pub fn bsc_capacity(p: f64) -> Result<f64, Error> {
    Ok(1.0 - binary_entropy(p)?)
}

/// Upper bound `2^((R - C_delta) n)`, clamped to 1, on the probability that
/// a uniformly random code of rate `R` has relative distance at most
/// `delta`, where `C_delta = 1 - h(delta)`.
pub fn gv_failure_bound(rate: f64, delta: f64, n: usize) -> f64 {
    let c_delta = 1.0 - h(delta);
    ((rate - c_delta) * n as f64).exp2().min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConcatenatedParams {
    pub n: usize,
    pub k: usize,
    /// Lower bound on the minimum distance.
    pub d_min: usize,
}

impl ConcatenatedParams {
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn relative_distance(&self) -> f64 {
        self.d_min as f64 / self.n as f64
    }
}

/// Parameters of an `[n1, k1, d1]` outer code concatenated with an
/// `[n2, k2, d2]` binary inner code.
pub fn concatenated_params(
    (n1, k1, d1): (usize, usize, usize),
    (n2, k2, d2): (usize, usize, usize),
) -> ConcatenatedParams {
    ConcatenatedParams {
        n: n1 * n2,
        k: k1 * k2,
        d_min: d1 * d2,
    }
}

/// Basis of the null space of the given rows over GF(2), i.e. a parity-check
/// matrix for the code the rows generate.
pub fn dual_basis(rows: &[BitString], n: usize) -> Vec<BitString> {
    let mut m: Vec<BitString> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..m.len()).find(|&i| m[i].get(col)) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row.get(col) {
                row.xor_assign(&pivot).expect("same length");
            }
        }
        pivots.push(col);
        r += 1;
    }
    m.truncate(r);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = BitString::zeros(n);
            v.set(f, true);
            for (row, &pc) in m.iter().zip(&pivots) {
                if row.get(f) {
                    v.set(pc, true);
                }
            }
            v
        })
        .collect()
}
