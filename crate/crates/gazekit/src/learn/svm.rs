//! Linear and kernelized SVM training by dual coordinate descent.
//!
//! The objective is 1/2 ||w||^2 + C * sum_i hinge(y_i, f(x_i)) — summed,
//! not averaged, over examples. The bias enters through an augmented
//! constant feature.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A trained linear classifier: score(x) = w . x + b.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearModel {
    pub w: Vec<f64>,
    pub b: f64,
    pub c: f64,
}

impl LinearModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() + self.b
    }
}

const RELATIVE_GAP: f64 = 1e-4;
const MAX_EPOCHS: usize = 1000;

/// L1-loss dual coordinate descent, run until the relative duality gap is
/// at most 1e-4 or the epoch budget is spent. Deterministic under the
/// permutation seed.
pub fn svm_train_linear(
    examples: &[Vec<f64>],
    labels: &[f64],
    c: f64,
    seed: u64,
) -> Result<LinearModel> {
    svm_train_linear_tol(examples, labels, c, seed, RELATIVE_GAP)
}

/// As [`svm_train_linear`] with an explicit relative duality-gap target.
pub fn svm_train_linear_tol(
    examples: &[Vec<f64>],
    labels: &[f64],
    c: f64,
    seed: u64,
    relative_gap: f64,
) -> Result<LinearModel> {
    let n = examples.len();
    assert_eq!(n, labels.len());
    let pos = labels.iter().filter(|&&y| y > 0.0).count();
    if pos == 0 || pos == n {
        return Err(Error::SingleClass);
    }
    let d = examples[0].len();
    // augmented bias feature
    let q: Vec<f64> = examples
        .iter()
        .map(|x| x.iter().map(|v| v * v).sum::<f64>() + 1.0)
        .collect();
    let mut alpha = vec![0.0f64; n];
    let mut w = vec![0.0f64; d + 1];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    let dot_aug = |w: &[f64], x: &[f64]| -> f64 {
        w[..d].iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() + w[d]
    };

    for _ in 0..MAX_EPOCHS {
        order.shuffle(&mut rng);
        for &i in &order {
            let yi = labels[i];
            let g = yi * dot_aug(&w, &examples[i]) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            if pg.abs() < 1e-12 {
                continue;
            }
            let new_alpha = (alpha[i] - g / q[i]).clamp(0.0, c);
            let delta = (new_alpha - alpha[i]) * yi;
            if delta != 0.0 {
                for (wj, &xj) in w[..d].iter_mut().zip(examples[i].iter()) {
                    *wj += delta * xj;
                }
                w[d] += delta;
                alpha[i] = new_alpha;
            }
        }
        // duality gap check
        let w_norm2: f64 = w.iter().map(|v| v * v).sum();
        let hinge: f64 = examples
            .iter()
            .zip(labels.iter())
            .map(|(x, &y)| (1.0 - y * dot_aug(&w, x)).max(0.0))
            .sum();
        let primal = 0.5 * w_norm2 + c * hinge;
        let dual = alpha.iter().sum::<f64>() - 0.5 * w_norm2;
        if primal - dual <= relative_gap * primal.abs().max(1e-12) {
            break;
        }
    }
    Ok(LinearModel { w: w[..d].to_vec(), b: w[d], c })
}

/// Dual coordinate descent for a kernel SVM without explicit bias.
/// Returns the signed dual coefficients alpha_i * y_i.
pub fn kernel_svm_dual(gram: &[f64], labels: &[f64], n: usize, c: f64) -> Vec<f64> {
    let mut alpha = vec![0.0f64; n];
    // f_i = sum_j alpha_j y_j K(i, j), maintained incrementally
    let mut f = vec![0.0f64; n];
    for _ in 0..MAX_EPOCHS {
        let mut max_violation = 0.0f64;
        for i in 0..n {
            let qii = gram[i * n + i].max(1e-12);
            let g = labels[i] * f[i] - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            max_violation = max_violation.max(pg.abs());
            if pg.abs() < 1e-12 {
                continue;
            }
            let new_alpha = (alpha[i] - g / qii).clamp(0.0, c);
            let delta = (new_alpha - alpha[i]) * labels[i];
            if delta != 0.0 {
                for j in 0..n {
                    f[j] += delta * gram[i * n + j];
                }
                alpha[i] = new_alpha;
            }
        }
        if max_violation < 1e-6 {
            break;
        }
    }
    (0..n).map(|i| alpha[i] * labels[i]).collect()
}
