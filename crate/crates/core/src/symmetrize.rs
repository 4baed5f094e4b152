//! Detector symmetrization.
//!
//! Unequal detector efficiencies leak which bit or basis produced a loss.
//! Discarding clicks of cell `(x, theta)` with probability `1 - t[x][theta]`
//! flattens the kept distribution to `1/4` per cell, so that a lost round
//! says nothing about `(x, theta)`.

use rand::Rng;

use crate::error::Error;

/// Click counts indexed `[x][theta]`, with `theta = 0` for H/V and `1` for the
/// diagonal basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DetectorCounts {
    pub count: [[u64; 2]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeepMatrix {
    pub t: [[f64; 2]; 2],
    pub pr_keep: f64,
}

const CELLS: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

impl DetectorCounts {
    /// Counts in `(x, theta)` order `(0,0), (0,1), (1,0), (1,1)`.
    pub fn from_flat(c: [u64; 4]) -> Self {
        Self {
            count: [[c[0], c[1]], [c[2], c[3]]],
        }
    }

    pub fn total(&self) -> u64 {
        self.count.iter().flatten().sum()
    }

    pub fn record(&mut self, x: bool, theta: bool) {
        self.count[x as usize][theta as usize] += 1;
    }

    /// Empirical joint frequency of each cell.
    pub fn frequencies(&self) -> [[f64; 2]; 2] {
        let total = self.total() as f64;
        let mut p = [[0.0; 2]; 2];
        for (x, th) in CELLS {
            p[x][th] = self.count[x][th] as f64 / total;
        }
        p
    }

    /// Parses a 2x2 table: one row per bit value, one column per basis.
    /// Fields are separated by commas or whitespace; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected 2 counts, found {}", fields.len()),
                });
            }
            let mut row = [0u64; 2];
            for (slot, f) in row.iter_mut().zip(&fields) {
                *slot = f.parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: format!("not a count: {f:?}"),
                })?;
            }
            rows.push(row);
        }
        if rows.len() != 2 {
            return Err(Error::Parse {
                line: 0,
                msg: format!("expected 2 rows, found {}", rows.len()),
            });
        }
        Ok(Self {
            count: [rows[0], rows[1]],
        })
    }
}

/// Keep probabilities that equalize all four cells onto the least frequent one.
pub fn solve_keep_probabilities(counts: &DetectorCounts) -> Result<KeepMatrix, Error> {
    for (x, th) in CELLS {
        if counts.count[x][th] == 0 {
            return Err(Error::EmptyDetector {
                x: x as u8,
                theta: th as u8,
            });
        }
    }
    let p = counts.frequencies();
    let min = CELLS
        .iter()
        .map(|&(x, th)| p[x][th])
        .fold(f64::INFINITY, f64::min);
    let mut t = [[0.0; 2]; 2];
    for (x, th) in CELLS {
        // Compare raw counts so ties land on exactly 1.
        let is_min = CELLS
            .iter()
            .all(|&(a, b)| counts.count[x][th] <= counts.count[a][b]);
        t[x][th] = if is_min { 1.0 } else { min / p[x][th] };
    }
    Ok(KeepMatrix {
        t,
        pr_keep: 4.0 * min,
    })
}

impl KeepMatrix {
    pub fn identity() -> Self {
        Self {
            t: [[1.0; 2]; 2],
            pr_keep: 1.0,
        }
    }

    pub fn keep<R: Rng + ?Sized>(&self, x: bool, theta: bool, rng: &mut R) -> bool {
        let t = self.t[x as usize][theta as usize];
        t >= 1.0 || rng.gen::<f64>() < t
    }

    /// Exact `Pr[x, theta | keep]` for the given counts.
    pub fn conditional(&self, counts: &DetectorCounts) -> [[f64; 2]; 2] {
        let p = counts.frequencies();
        let kept: f64 = CELLS.iter().map(|&(x, th)| p[x][th] * self.t[x][th]).sum();
        let mut out = [[0.0; 2]; 2];
        for (x, th) in CELLS {
            out[x][th] = p[x][th] * self.t[x][th] / kept;
        }
        out
    }
}

/// One independent keep decision per event. Bob uses the mask to turn
/// discarded clicks into reported losses.
pub fn keep_mask<R: Rng + ?Sized>(
    cells: impl IntoIterator<Item = (bool, bool)>,
    keep: &KeepMatrix,
    rng: &mut R,
) -> Vec<bool> {
    cells
        .into_iter()
        .map(|(x, th)| keep.keep(x, th, rng))
        .collect()
}

/// Drops events whose keep decision fails. `cell` extracts `(x, theta)`.
pub fn apply_symmetrization<T, R: Rng + ?Sized>(
    events: impl IntoIterator<Item = T>,
    cell: impl Fn(&T) -> (bool, bool),
    keep: &KeepMatrix,
    rng: &mut R,
) -> Vec<T> {
    events
        .into_iter()
        .filter(|e| {
            let (x, th) = cell(e);
            keep.keep(x, th, rng)
        })
        .collect()
}

/// `1 - (1 - p_noclick_h) * pr_keep`: symmetrization turns discarded clicks
/// into losses.
pub fn adjusted_no_click(p_noclick_h: f64, pr_keep: f64) -> f64 {
    1.0 - (1.0 - p_noclick_h) * pr_keep
}

/// Fraction of disagreeing pairs among matched-basis rounds, or `None` if
/// there are none. Callers undo any intended anticorrelation first.
pub fn recount_p_err(pairs: impl IntoIterator<Item = (bool, bool)>) -> Option<f64> {
    let (mut total, mut wrong) = (0u64, 0u64);
    for (a, b) in pairs {
        total += 1;
        wrong += (a != b) as u64;
    }
    (total > 0).then(|| wrong as f64 / total as f64)
}
