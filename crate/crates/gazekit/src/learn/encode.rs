//! Descriptor-set encodings: bag-of-words histograms and second-order
//! pooling.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::kmeans::Vocabulary;

/// L1-normalized word histogram. `empty` marks the uniform fallback for an
/// empty descriptor set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BowHistogram {
    pub values: Vec<f64>,
    pub empty: bool,
}

/// Hard-assignment bag of words, L1 normalized.
pub fn bow_encode(descriptors: &[Vec<f64>], vocab: &Vocabulary) -> BowHistogram {
    let k = vocab.k;
    if descriptors.is_empty() {
        return BowHistogram { values: vec![1.0 / k as f64; k], empty: true };
    }
    let mut counts = vec![0.0f64; k];
    for d in descriptors {
        counts[vocab.assign(d)] += 1.0;
    }
    let total = descriptors.len() as f64;
    for c in &mut counts {
        *c /= total;
    }
    BowHistogram { values: counts, empty: false }
}

/// Second-order pooling: regularized covariance of the descriptor set,
/// matrix logarithm via symmetric eigendecomposition, upper-triangle
/// vectorization (off-diagonals weighted sqrt 2) and elementwise signed
/// power.
pub fn o2p_encode(descriptors: &[Vec<f64>], epsilon: f64, exponent: f64) -> Result<Vec<f64>> {
    let n = descriptors.len();
    if n < 2 {
        return Err(Error::TooFewDescriptors);
    }
    let d = descriptors[0].len();
    let mut mean = vec![0.0; d];
    for row in descriptors {
        for (m, &x) in mean.iter_mut().zip(row.iter()) {
            *m += x / n as f64;
        }
    }
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for row in descriptors {
        for i in 0..d {
            let ci = row[i] - mean[i];
            for j in i..d {
                cov[(i, j)] += ci * (row[j] - mean[j]);
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] / denom + if i == j { epsilon } else { 0.0 };
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let log_m = matrix_log(&cov);
    // upper-triangle vectorization preserving the Frobenius inner product
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    let sqrt2 = std::f64::consts::SQRT_2;
    for i in 0..d {
        for j in i..d {
            let v = if i == j { log_m[(i, j)] } else { sqrt2 * log_m[(i, j)] };
            out.push(v.abs().powf(exponent) * v.signum());
        }
    }
    Ok(out)
}

/// Principal matrix logarithm of an SPD matrix.
pub fn matrix_log(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let mut log_vals = eig.eigenvalues.clone();
    for v in log_vals.iter_mut() {
        *v = v.max(f64::MIN_POSITIVE).ln();
    }
    &eig.eigenvectors * DMatrix::from_diagonal(&log_vals) * eig.eigenvectors.transpose()
}

/// Matrix exponential of a symmetric matrix; inverse of [`matrix_log`] on
/// the SPD cone.
pub fn matrix_exp(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let mut exp_vals = eig.eigenvalues.clone();
    for v in exp_vals.iter_mut() {
        *v = v.exp();
    }
    &eig.eigenvectors * DMatrix::from_diagonal(&exp_vals) * eig.eigenvectors.transpose()
}
