//! Tie-corrected ROC curves shared by the consistency and saliency metrics.

use serde::{Deserialize, Serialize};

/// ROC curve with trapezoidal, tie-corrected AUC.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RocResult {
    pub auc: f64,
    pub curve: Vec<(f64, f64)>,
    pub n_samples: usize,
}

/// Builds a pooled ROC from scored samples. Ties contribute half via the
/// trapezoid between the tie group's endpoints.
pub fn roc(scores: &[f64], labels: &[bool]) -> RocResult {
    debug_assert_eq!(scores.len(), labels.len());
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    let neg = labels.len() as f64 - pos;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());

    let mut curve = vec![(0.0, 0.0)];
    let mut auc = 0.0;
    let (mut tp, mut fp) = (0.0f64, 0.0f64);
    let mut i = 0;
    while i < idx.len() {
        // one step per tie group
        let s = scores[idx[i]];
        let (mut dtp, mut dfp) = (0.0, 0.0);
        while i < idx.len() && scores[idx[i]] == s {
            if labels[idx[i]] {
                dtp += 1.0;
            } else {
                dfp += 1.0;
            }
            i += 1;
        }
        let (tp2, fp2) = (tp + dtp, fp + dfp);
        auc += (fp2 - fp) / neg.max(1.0) * (tp + tp2) / (2.0 * pos.max(1.0));
        tp = tp2;
        fp = fp2;
        curve.push((fp / neg.max(1.0), tp / pos.max(1.0)));
    }
    if curve.last() != Some(&(1.0, 1.0)) {
        curve.push((1.0, 1.0));
    }
    RocResult { auc, curve, n_samples: scores.len() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_ranking_is_one() {
        let r = roc(&[3.0, 2.0, 1.0, 0.0], &[true, true, false, false]);
        assert!((r.auc - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_scores_are_half() {
        let r = roc(&[1.0; 10], &[true, false, true, false, false, false, true, false, false, false]);
        assert!((r.auc - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reversed_ranking_is_zero() {
        let r = roc(&[0.0, 1.0], &[true, false]);
        assert!(r.auc.abs() < 1e-12);
    }

    #[test]
    fn curve_is_monotone_with_unit_endpoints() {
        let r = roc(&[0.9, 0.8, 0.8, 0.1, 0.5], &[true, false, true, false, true]);
        assert_eq!(r.curve.first(), Some(&(0.0, 0.0)));
        assert_eq!(r.curve.last(), Some(&(1.0, 1.0)));
        for w in r.curve.windows(2) {
            assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
        }
    }
}
