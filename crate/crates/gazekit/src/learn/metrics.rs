//! Ranking metrics for retrieval-style evaluation.

use crate::error::{Error, Result};

/// Average precision of a scored ranking.
///
/// Items are sorted by descending score with a stable sort, so ties keep
/// their input order. AP is the mean over positive items of the precision
/// at each positive's rank. At least one positive label is required.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Result<f64> {
    assert_eq!(scores.len(), labels.len());
    if !labels.iter().any(|&l| l) {
        return Err(Error::NoPositives);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let mut hits = 0usize;
    let mut sum = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        if labels[i] {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / hits as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct definition on an explicit permutation of item indices.
    fn ap_of_ranking(ranking: &[usize], labels: &[bool]) -> f64 {
        let mut hits = 0usize;
        let mut sum = 0.0;
        for (rank, &i) in ranking.iter().enumerate() {
            if labels[i] {
                hits += 1;
                sum += hits as f64 / (rank + 1) as f64;
            }
        }
        sum / hits as f64
    }

    #[test]
    fn perfect_ranking_is_one() {
        let scores = [3.0, 2.0, 1.0, 0.5];
        let labels = [true, true, false, false];
        assert_eq!(average_precision(&scores, &labels).unwrap(), 1.0);
    }

    #[test]
    fn hand_computed_mixed_ranking() {
        // positives at ranks 2 and 3 -> (1/2 + 2/3) / 2 = 7/12
        let scores = [0.9, 0.8, 0.7];
        let labels = [false, true, true];
        let got = average_precision(&scores, &labels).unwrap();
        assert!((got - 7.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn no_positives_errors() {
        assert!(matches!(
            average_precision(&[1.0, 2.0], &[false, false]),
            Err(Error::NoPositives)
        ));
    }

    #[test]
    fn exhaustive_label_patterns_match_direct_definition() {
        // all non-empty label patterns over n = 8 distinct scores
        let n = 8;
        let scores: Vec<f64> = (0..n).map(|i| (n - i) as f64).collect();
        let ranking: Vec<usize> = (0..n).collect();
        for mask in 1u32..(1 << n) {
            let labels: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            let got = average_precision(&scores, &labels).unwrap();
            let want = ap_of_ranking(&ranking, &labels);
            assert!((got - want).abs() < 1e-12, "mask {mask}: {got} vs {want}");
        }
    }

    #[test]
    fn ties_keep_input_order() {
        // equal scores: the stable sort preserves index order, so the
        // positive listed first gets rank 1
        let scores = [1.0, 1.0];
        assert_eq!(average_precision(&scores, &[true, false]).unwrap(), 1.0);
        assert_eq!(average_precision(&scores, &[false, true]).unwrap(), 0.5);
    }
}
