//! Multiple-kernel learning: a convex combination of precomputed Gram
//! matrices whose weights are fit jointly with a kernel SVM.
//!
//! Training alternates between solving the SVM dual on the current
//! combined kernel and a projected-gradient step on the simplex of kernel
//! weights, lightly entropy-regularized to keep the weights strictly
//! interior and the iteration stable.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::svm::kernel_svm_dual;

/// A stack of precomputed n x n Gram matrices over the same item set.
#[derive(Debug, Clone)]
pub struct GramSet {
    pub n: usize,
    /// Row-major n*n matrices, one per kernel.
    pub grams: Vec<Vec<f64>>,
}

impl GramSet {
    pub fn new(n: usize, grams: Vec<Vec<f64>>) -> Result<Self> {
        for g in &grams {
            if g.len() != n * n {
                return Err(Error::DimensionMismatch(format!(
                    "gram has {} entries, expected {}",
                    g.len(),
                    n * n
                )));
            }
        }
        Ok(Self { n, grams })
    }

    /// Weighted combination sum_m beta_m K_m, written into `out`.
    fn combine(&self, betas: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (g, &b) in self.grams.iter().zip(betas.iter()) {
            if b == 0.0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(g.iter()) {
                *o += b * v;
            }
        }
    }
}

/// A trained multiple-kernel classifier. Scoring a new item needs its
/// kernel evaluations against every training item, per kernel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MklModel {
    /// Simplex weights over kernels.
    pub betas: Vec<f64>,
    /// Signed dual coefficients alpha_i * y_i over training items.
    pub dual_coef: Vec<f64>,
}

impl MklModel {
    /// Score from the columns of each training Gram matrix for one test
    /// item: `cols[m][i]` = K_m(train_i, test).
    pub fn score(&self, cols: &[Vec<f64>]) -> f64 {
        let mut s = 0.0;
        for (col, &b) in cols.iter().zip(self.betas.iter()) {
            if b == 0.0 {
                continue;
            }
            s += b * col.iter().zip(self.dual_coef.iter()).map(|(k, a)| k * a).sum::<f64>();
        }
        s
    }
}

const MKL_OUTER_ITERS: usize = 50;
const STEP: f64 = 0.1;
const EIGEN_FLOOR: f64 = -1e-6;

/// Fit kernel weights and dual coefficients by alternating optimization.
///
/// `sigma_reg` weights the entropy term that keeps the kernel weights
/// strictly interior; 0 disables it. Each Gram matrix is validated to be
/// (numerically) positive semidefinite: a smallest eigenvalue below -1e-6
/// is rejected.
pub fn mkl_train(grams: &GramSet, labels: &[f64], c: f64, sigma_reg: f64) -> Result<MklModel> {
    let n = grams.n;
    assert_eq!(labels.len(), n);
    let m = grams.grams.len();
    if m == 0 {
        return Err(Error::DimensionMismatch("no kernels".into()));
    }
    let pos = labels.iter().filter(|&&y| y > 0.0).count();
    if pos == 0 || pos == n {
        return Err(Error::SingleClass);
    }
    for g in &grams.grams {
        let mat = DMatrix::from_row_slice(n, n, g);
        let sym = (&mat + mat.transpose()) * 0.5;
        let min_eig = sym
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < EIGEN_FLOOR {
            return Err(Error::NotPsd(min_eig));
        }
    }

    let mut betas = vec![1.0 / m as f64; m];
    let mut combined = vec![0.0f64; n * n];
    let mut coef = vec![0.0f64; n];
    for _ in 0..MKL_OUTER_ITERS {
        grams.combine(&betas, &mut combined);
        coef = kernel_svm_dual(&combined, labels, n, c);
        // objective gradient wrt beta_m is -1/2 a^T K_m a with a the
        // signed dual coefficients; descend and re-project
        let mut grad = vec![0.0f64; m];
        for (gm, g) in grad.iter_mut().zip(grams.grams.iter()) {
            let mut q = 0.0;
            for i in 0..n {
                let row = &g[i * n..(i + 1) * n];
                let ri: f64 = row.iter().zip(coef.iter()).map(|(k, a)| k * a).sum();
                q += coef[i] * ri;
            }
            *gm = -0.5 * q;
        }
        let mut next: Vec<f64> = betas
            .iter()
            .zip(grad.iter())
            .map(|(&b, &g)| b - STEP * (g + sigma_reg * (b.max(1e-12).ln() + 1.0)))
            .collect();
        project_simplex(&mut next);
        let moved: f64 = next.iter().zip(betas.iter()).map(|(a, b)| (a - b).abs()).sum();
        betas = next;
        if moved < 1e-7 {
            grams.combine(&betas, &mut combined);
            coef = kernel_svm_dual(&combined, labels, n, c);
            break;
        }
    }
    Ok(MklModel { betas, dual_coef: coef })
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let n = v.len();
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    let _ = n;
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}
