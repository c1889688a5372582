//! Nearest-rank quantiles.

use serde::{Deserialize, Serialize};

/// Zero-based index of the nearest-rank `p`-quantile in a sorted sample of
/// size `n`: the `ceil(p * n)`-th smallest element (at least the first).
///
/// Products such as `0.1 * 30` that land a hair above an integer in binary
/// are snapped back before taking the ceiling.
pub fn nearest_rank_index(n: usize, p: f64) -> usize {
    assert!(n > 0, "quantile of empty sample");
    let exact = p * n as f64;
    let snapped = if (exact - exact.round()).abs() < 1e-9 {
        exact.round()
    } else {
        exact
    };
    (snapped.ceil() as usize).clamp(1, n) - 1
}

/// Nearest-rank quantile of an already sorted slice.
pub fn nearest_rank<T: Copy>(sorted: &[T], p: f64) -> T {
    sorted[nearest_rank_index(sorted.len(), p)]
}

/// Min, lower quartile, median, upper quartile and max.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: usize,
    pub q1: usize,
    pub median: usize,
    pub q3: usize,
    pub max: usize,
}

impl FiveNumber {
    /// Five-number summary; all zero for an empty sample.
    pub fn of(mut values: Vec<usize>) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        values.sort_unstable();
        Self {
            min: values[0],
            q1: nearest_rank(&values, 0.25),
            median: nearest_rank(&values, 0.5),
            q3: nearest_rank(&values, 0.75),
            max: values[values.len() - 1],
        }
    }

    pub fn as_array(&self) -> [usize; 5] {
        [self.min, self.q1, self.median, self.q3, self.max]
    }
}
