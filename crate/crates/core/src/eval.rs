//! Partition agreement scores.

use std::collections::HashMap;

/// Adjusted Rand index between two labelings of the same items.
///
/// 1 for identical partitions (up to relabeling), about 0 for independent
/// ones. When both partitions are trivial in the same way (all singletons
/// or one cluster) the index is defined as 1.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings differ in length");
    let n = a.len() as u64;
    if n < 2 {
        return 1.0;
    }
    let pairs = |c: u64| c * c.saturating_sub(1) / 2;

    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index = table.values().map(|&c| pairs(c)).sum::<u64>() as f64;
    let sum_a = rows.values().map(|&c| pairs(c)).sum::<u64>() as f64;
    let sum_b = cols.values().map(|&c| pairs(c)).sum::<u64>() as f64;
    let expected = sum_a * sum_b / pairs(n) as f64;
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // reference values from scikit-learn's adjusted_rand_score
    #[test]
    fn known_values() {
        assert_relative_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 0, 1, 2]), 0.5714285714285714, epsilon = 1e-15);
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]), 1.0);
        assert_eq!(adjusted_rand_index(&[0, 0, 0, 0], &[0, 1, 2, 3]), 0.0);
        assert_relative_eq!(
            adjusted_rand_index(&[0, 0, 0, 1, 1, 1, 2, 2, 2], &[0, 0, 1, 1, 1, 2, 2, 2, 0]),
            0.1111111111111111,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            adjusted_rand_index(&[0, 0, 1, 2, 2, 2], &[0, 1, 1, 2, 2, 0]),
            0.07407407407407407,
            epsilon = 1e-15
        );
    }

    #[test]
    fn symmetric_and_label_invariant() {
        let a = [3, 3, 1, 1, 7, 7, 7];
        let b = [0, 1, 1, 1, 2, 2, 0];
        assert_eq!(adjusted_rand_index(&a, &b), adjusted_rand_index(&b, &a));
        let relabeled: Vec<usize> = a.iter().map(|x| x * 10 + 1).collect();
        assert_eq!(adjusted_rand_index(&a, &b), adjusted_rand_index(&relabeled, &b));
    }
}
