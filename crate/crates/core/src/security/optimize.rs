//! One-dimensional maximization: a coarse grid to find the basin, then
//! golden-section search between the best grid point's neighbours.

/// Relative tolerance on the argument for every golden-section refinement.
pub const ARG_TOLERANCE: f64 = 1e-10;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub arg: f64,
    pub value: f64,
}

/// Golden-section search for a unimodal `f` on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Maximum {
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > ARG_TOLERANCE * (lo.abs() + hi.abs()).max(f64::MIN_POSITIVE) {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        }
        if a >= b {
            break;
        }
    }
    if fa >= fb {
        Maximum { arg: a, value: fa }
    } else {
        Maximum { arg: b, value: fb }
    }
}

/// Evaluates `f` on `grid` (sorted ascending), then refines around the best
/// point. The result is never worse than the best grid value.
pub fn grid_then_golden(f: impl Fn(f64) -> f64, grid: &[f64]) -> Maximum {
    assert!(!grid.is_empty());
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let best = values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let coarse = Maximum {
        arg: grid[best],
        value: values[best],
    };
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    if hi <= lo {
        return coarse;
    }
    let fine = golden_max(&f, lo, hi);
    if fine.value > coarse.value {
        fine
    } else {
        coarse
    }
}

/// `count` points spaced evenly in log between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
