//! Chi-squared kernels: the exact RBF form and the explicit homogeneous
//! feature map approximation.

use crate::error::{Error, Result};

/// Chi-squared distance 1/2 sum (x_i - y_i)^2 / (x_i + y_i); zero-sum terms
/// contribute 0.
pub fn chi2_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y.iter())
        .map(|(&a, &b)| {
            let s = a + b;
            if s > 0.0 {
                (a - b) * (a - b) / s
            } else {
                0.0
            }
        })
        .sum::<f64>()
        * 0.5
}

/// Additive chi-squared kernel sum 2 x_i y_i / (x_i + y_i).
pub fn chi2_kernel(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y.iter())
        .map(|(&a, &b)| {
            let s = a + b;
            if s > 0.0 {
                2.0 * a * b / s
            } else {
                0.0
            }
        })
        .sum()
}

/// RBF-chi-squared Gram matrix K(x, y) = exp(-gamma * chi2(x, y)) between
/// the rows of `x` and the rows of `y`.
pub fn chi2_rbf_gram(x: &[Vec<f64>], y: &[Vec<f64>], gamma: f64) -> Result<Vec<Vec<f64>>> {
    for row in x.iter().chain(y.iter()) {
        if row.iter().any(|&v| v < 0.0) {
            return Err(Error::NegativeInput);
        }
    }
    Ok(x.iter()
        .map(|a| y.iter().map(|b| (-gamma * chi2_distance(a, b)).exp()).collect())
        .collect())
}

/// Explicit feature map approximating the additive chi-squared kernel: the
/// sampled homogeneous-kernel map with spectrum kappa(omega) = sech(pi
/// omega). Each input coordinate expands to 2n+1 values; inner products of
/// mapped vectors approximate [`chi2_kernel`].
pub fn chi2_feature_map(x: &[f64], order: usize, period: f64) -> Result<Vec<f64>> {
    if x.iter().any(|&v| v < 0.0) {
        return Err(Error::NegativeInput);
    }
    let n = order;
    let l = period;
    let mut out = Vec::with_capacity(x.len() * (2 * n + 1));
    for &xi in x {
        if xi <= 0.0 {
            out.extend(std::iter::repeat(0.0).take(2 * n + 1));
            continue;
        }
        let log_x = xi.ln();
        // j = 0: kappa(0) = sech(0) = 1
        out.push((xi * l).sqrt());
        for j in 1..=n {
            let omega = j as f64 * l;
            let kappa = 1.0 / (std::f64::consts::PI * omega).cosh();
            let scale = (2.0 * xi * l * kappa).sqrt();
            let phase = omega * log_x;
            out.push(scale * phase.cos());
            out.push(scale * phase.sin());
        }
    }
    Ok(out)
}
