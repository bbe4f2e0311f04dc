//! Fixed-order reductions.
//!
//! Every average over vertices or sign vectors goes through [`tree_sum`] so the
//! floating-point summation order depends only on the length of the range.

const LEAF: usize = 8;

/// Pairwise (tree) sum of `term(i)` for `i in 0..len`.
pub fn tree_sum<F: Fn(usize) -> f64>(len: usize, term: F) -> f64 {
    sum_range(0, len, &term)
}

fn sum_range<F: Fn(usize) -> f64>(lo: usize, hi: usize, term: &F) -> f64 {
    if hi - lo <= LEAF {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += term(i);
        }
        acc
    } else {
        let mid = lo + (hi - lo) / 2;
        sum_range(lo, mid, term) + sum_range(mid, hi, term)
    }
}

/// Mean of `term(i)` over `0..len` with the pairwise sum; 0 for an empty range.
pub fn tree_mean<F: Fn(usize) -> f64>(len: usize, term: F) -> f64 {
    if len == 0 {
        return 0.0;
    }
    tree_sum(len, term) / len as f64
}

/// Mean of a slice.
pub fn mean(xs: &[f64]) -> f64 {
    tree_mean(xs.len(), |i| xs[i])
}
