//! k-means vocabulary building with k-means++ seeding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A visual vocabulary: k centroids of descriptor dimension d.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocabulary {
    pub centroids: Vec<Vec<f64>>,
    pub k: usize,
}

impl Vocabulary {
    /// Index of the nearest centroid (exact search).
    pub fn assign(&self, point: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, c) in self.centroids.iter().enumerate() {
            let d = sq_dist(point, c);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm with k-means++ seeding, run to assignment fixpoint or
/// `max_iter`. Deterministic under the seed.
pub fn kmeans(points: &[Vec<f64>], k: usize, rng_seed: u64, max_iter: usize) -> Result<Vocabulary> {
    let n = points.len();
    if n < k {
        return Err(Error::TooFewPoints { points: n, k });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..n)].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            // all mass collapsed; pick the first point not yet a centroid
            points
                .iter()
                .find(|p| centroids.iter().all(|c| sq_dist(p, c) > 0.0))
                .unwrap_or(&points[rng.gen_range(0..n)])
                .clone()
        } else {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            points[pick].clone()
        };
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &next));
        }
        centroids.push(next);
    }

    let d = points[0].len();
    let mut assign = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, cent) in centroids.iter().enumerate() {
                let dd = sq_dist(p, cent);
                if dd < best_d {
                    best_d = dd;
                    best = c;
                }
            }
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            counts[assign[i]] += 1;
            for (s, &x) in sums[assign[i]].iter_mut().zip(p.iter()) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for (cent, s) in centroids[c].iter_mut().zip(sums[c].iter()) {
                    *cent = s / counts[c] as f64;
                }
            }
        }
    }
    Ok(Vocabulary { centroids, k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn k_equals_n_gives_zero_sse() {
        let points = vec![vec![0.0, 0.0], vec![1.0, 5.0], vec![-3.0, 2.0]];
        let vocab = kmeans(&points, 3, 1, 100).unwrap();
        // every point is its own centroid
        let sse: f64 = points.iter().map(|p| sq_dist(p, &vocab.centroids[vocab.assign(p)])).sum();
        assert!(sse < 1e-12);
    }

    #[test]
    fn recovers_planted_blobs() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let sigma = 0.3;
        let mut points = Vec::new();
        let means = [vec![0.0, 0.0], vec![10.0, 10.0]];
        for m in &means {
            for _ in 0..200 {
                let gauss = |rng: &mut ChaCha20Rng| {
                    let (u1, u2): (f64, f64) = (rng.gen(), rng.gen());
                    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                };
                points.push(vec![m[0] + sigma * gauss(&mut rng), m[1] + sigma * gauss(&mut rng)]);
            }
        }
        let vocab = kmeans(&points, 2, 7, 100).unwrap();
        let mut found = vocab.centroids.clone();
        found.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        for (f, m) in found.iter().zip(means.iter()) {
            let d = sq_dist(f, m).sqrt();
            assert!(d < 0.1 * sigma * 200f64.sqrt(), "centroid off by {d}");
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let points: Vec<Vec<f64>> =
            (0..50).map(|i| vec![(i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()]).collect();
        let a = kmeans(&points, 5, 42, 100).unwrap();
        let b = kmeans(&points, 5, 42, 100).unwrap();
        assert_eq!(a.centroids, b.centroids);
    }

    #[test]
    fn too_few_points_errors() {
        let points = vec![vec![1.0]];
        assert!(matches!(kmeans(&points, 2, 0, 10), Err(Error::TooFewPoints { .. })));
    }
}
