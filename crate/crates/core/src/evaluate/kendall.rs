//! Tie-corrected Kendall rank correlation.

use super::{EvalError, Result};

/// Pair counts behind tau-b. `tied_x` and `tied_y` include pairs tied in
/// both coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairCounts {
    pub pairs: u64,
    pub tied_x: u64,
    pub tied_y: u64,
    /// Concordant minus discordant.
    pub net: i64,
}

impl PairCounts {
    /// `net / sqrt((n0 - n1)(n0 - n2))`; `None` if either side is fully tied.
    pub fn tau_b(&self) -> Option<f64> {
        let (a, b) = (self.pairs - self.tied_x, self.pairs - self.tied_y);
        if a == 0 || b == 0 {
            return None;
        }
        Some(self.net as f64 / ((a as f64) * (b as f64)).sqrt())
    }
}

fn tie_pairs(run: u64) -> u64 {
    run * run.saturating_sub(1) / 2
}

/// Sum of `C(run, 2)` over runs of equal consecutive elements.
fn tied_pairs<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += tie_pairs(run);
            run = 1;
        }
    }
    total + tie_pairs(run)
}

/// Stable merge sort returning the number of strict inversions.
fn sort_count_swaps(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        sort_count_swaps(l, bl) + sort_count_swaps(r, br)
    };
    let (mut i, mut j) = (0, mid);
    for slot in buf.iter_mut().take(n) {
        if j >= n || (i < mid && v[i] <= v[j]) {
            *slot = v[i];
            i += 1;
        } else {
            *slot = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        }
    }
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Exact pair counts in O(n log n).
pub fn pair_counts(x: &[f64], y: &[f64]) -> Result<PairCounts> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let n = x.len() as u64;
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let tied_x = tied_pairs(&xs);
    let tied_xy = tied_pairs(&pairs);
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; ys.len()];
    let swaps = sort_count_swaps(&mut ys, &mut buf);
    let tied_y = tied_pairs(&ys);
    let total = tie_pairs(n);
    let net = (total + tied_xy) as i64 - (tied_x + tied_y) as i64 - 2 * swaps as i64;
    Ok(PairCounts { pairs: total, tied_x, tied_y, net })
}

/// Kendall's tau-b. Errors with `AllTied` when either vector is constant.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64> {
    pair_counts(x, y)?.tau_b().ok_or(EvalError::AllTied)
}
