//! Inter-subject gaze consistency metrics.
//!
//! Spatial agreement predicts a held-out subject's fixation from the
//! remaining subjects' empirical map, pooling one ROC over sampled frames;
//! the cross-stimulus variant predicts across unrelated videos to isolate
//! bias. Sequential consistency is measured on AOI strings via first-order
//! Markov dynamics and Needleman-Wunsch alignment.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::aoi::{self, AoiParams, AoiString};
use crate::error::{Error, Result};
use crate::fixation::{empirical_frame_map, FixationSet};
use crate::roc::{roc, RocResult};
use crate::volume::Volume;

/// First-order Markov model over AOI indices with Laplace smoothing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkovModel {
    pub a: usize,
    /// Row-stochastic A x A matrix, row-major.
    pub transition: Vec<f64>,
    pub laplace_add: f64,
}

impl MarkovModel {
    #[inline]
    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.transition[(from - 1) * self.a + (to - 1)]
    }
}

/// Estimates transition probabilities from AOI strings by counting, with
/// Laplace smoothing. With `laplace_add = 0`, a symbol with no outgoing
/// transitions makes its row undefined and is reported as an error.
pub fn markov_fit(strings: &[AoiString], a: usize, laplace_add: f64) -> Result<MarkovModel> {
    assert!(a >= 1 && laplace_add >= 0.0);
    let mut counts = vec![0.0f64; a * a];
    for s in strings {
        for w in s.symbols.windows(2) {
            counts[(w[0] - 1) * a + (w[1] - 1)] += 1.0;
        }
    }
    let mut transition = vec![0.0f64; a * a];
    for row in 0..a {
        let total: f64 = counts[row * a..(row + 1) * a].iter().sum();
        let denom = total + a as f64 * laplace_add;
        if denom <= 0.0 {
            return Err(Error::ZeroDivision(row + 1));
        }
        for col in 0..a {
            transition[row * a + col] = (counts[row * a + col] + laplace_add) / denom;
        }
    }
    Ok(MarkovModel { a, transition, laplace_add })
}

/// Per-transition geometric-mean probability of `string` under `model`.
/// The first symbol carries probability 1; strings of length <= 1 score 1.
pub fn markov_score(model: &MarkovModel, string: &AoiString) -> f64 {
    let n = string.symbols.len();
    if n <= 1 {
        return 1.0;
    }
    let log_sum: f64 = string
        .symbols
        .windows(2)
        .map(|w| model.prob(w[0], w[1]).ln())
        .sum();
    (log_sum / (n - 1) as f64).exp()
}

/// Leave-one-subject-out Markov consistency: fit on all other strings,
/// score the held-out string, average over subjects.
pub fn markov_consistency(strings: &[AoiString], a: usize, laplace_add: f64) -> Result<f64> {
    if strings.len() < 2 {
        return Err(Error::InsufficientStrings);
    }
    let mut total = 0.0;
    for held in 0..strings.len() {
        let rest: Vec<AoiString> = strings
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != held)
            .map(|(_, s)| s.clone())
            .collect();
        let model = markov_fit(&rest, a, laplace_add)?;
        total += markov_score(&model, &strings[held]);
    }
    Ok(total / strings.len() as f64)
}

/// Alignment weights; the defaults make the score the LCS length.
#[derive(Debug, Clone, Copy)]
pub struct AlignWeights {
    pub matching: f64,
    pub mismatch: f64,
    pub gap: f64,
}

impl Default for AlignWeights {
    fn default() -> Self {
        AlignWeights { matching: 1.0, mismatch: 0.0, gap: 0.0 }
    }
}

/// Global sequence alignment score (Needleman-Wunsch) and its normalization
/// by the longer string's length (0 when both are empty).
pub fn align_score(f: &[usize], g: &[usize], w: AlignWeights) -> (f64, f64) {
    let (n, m) = (f.len(), g.len());
    let mut prev = vec![0.0f64; m + 1];
    let mut cur = vec![0.0f64; m + 1];
    for j in 1..=m {
        prev[j] = prev[j - 1] + w.gap;
    }
    for i in 1..=n {
        cur[0] = prev[0] + w.gap;
        for j in 1..=m {
            let sim = if f[i - 1] == g[j - 1] { w.matching } else { w.mismatch };
            cur[j] = (prev[j - 1] + sim).max(prev[j] + w.gap).max(cur[j - 1] + w.gap);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let score = prev[m];
    let longest = n.max(m);
    let normalized = if longest == 0 { 0.0 } else { score / longest as f64 };
    (score, normalized)
}

/// Which frames are paired when predicting a held-out subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    SameStimulus,
    CrossStimulus,
}

/// Sampling parameters for [`spatial_agreement`] and
/// [`task_influence_pvalues`]. `sigma_px` and grid sizes are expressed at
/// video resolution; maps are computed at `1/downsample` scale.
#[derive(Debug, Clone)]
pub struct SpatialParams {
    pub n_samples: usize,
    pub sigma_px: f64,
    pub skip_ms: f64,
    pub downsample: usize,
    pub seed: u64,
}

impl Default for SpatialParams {
    fn default() -> Self {
        SpatialParams { n_samples: 1000, sigma_px: 40.0, skip_ms: 200.0, downsample: 4, seed: 0 }
    }
}

struct GridCtx {
    gw: usize,
    gh: usize,
    scale: f64,
}

fn grid_ctx(set: &FixationSet, video: &str, downsample: usize) -> GridCtx {
    let meta = &set.videos[video];
    let scale = 1.0 / downsample as f64;
    GridCtx {
        gw: ((meta.width as usize) / downsample).max(1),
        gh: ((meta.height as usize) / downsample).max(1),
        scale,
    }
}

/// Frames past the skip window where at least `min_subjects` subjects fixate.
fn eligible_frames(set: &FixationSet, skip_ms: f64, min_subjects: usize) -> Vec<(String, u32)> {
    let mut out = Vec::new();
    for (vid, meta) in &set.videos {
        let skip = (skip_ms / 1000.0 * meta.fps).ceil() as u32;
        for frame in skip..meta.frame_count {
            let mut subjects: Vec<&str> =
                set.at_frame(vid, frame).map(|r| r.subject.as_str()).collect();
            subjects.sort();
            subjects.dedup();
            if subjects.len() >= min_subjects {
                out.push((vid.clone(), frame));
            }
        }
    }
    out
}

/// Leave-one-subject-out spatial agreement as one pooled, tie-corrected ROC.
///
/// For each sampled frame and each subject fixating it, the remaining
/// subjects' empirical map scores the fixated cell (positive) against every
/// other cell (negatives). Under cross-stimulus pairing the map is built
/// from a random frame of a different video.
pub fn spatial_agreement(
    fixations: &FixationSet,
    pairing: Pairing,
    params: &SpatialParams,
) -> Result<RocResult> {
    if fixations.subjects().len() < 2 {
        return Err(Error::InsufficientSubjects);
    }
    let eligible = eligible_frames(fixations, params.skip_ms, 2);
    if eligible.is_empty() {
        return Err(Error::NoEligibleFrames);
    }
    if pairing == Pairing::CrossStimulus && fixations.videos.len() < 2 {
        return Err(Error::NoEligibleFrames);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let mut scores = Vec::new();
    let mut labels = Vec::new();

    for _ in 0..params.n_samples {
        let (vid, frame) = eligible[rng.gen_range(0..eligible.len())].clone();
        let ctx = grid_ctx(fixations, &vid, params.downsample);
        let sigma = params.sigma_px * ctx.scale;

        let mut test_subjects: Vec<&str> =
            fixations.at_frame(&vid, frame).map(|r| r.subject.as_str()).collect();
        test_subjects.sort();
        test_subjects.dedup();

        for subject in test_subjects {
            // this subject's single fixation on the frame
            let fix = fixations
                .at_frame(&vid, frame)
                .find(|r| r.subject == subject)
                .expect("subject is fixating");
            let train_points: Vec<(f64, f64)> = match pairing {
                Pairing::SameStimulus => fixations
                    .at_frame(&vid, frame)
                    .filter(|r| r.subject != subject)
                    .map(|r| (r.x * ctx.scale, r.y * ctx.scale))
                    .collect(),
                Pairing::CrossStimulus => {
                    let others: Vec<&(String, u32)> =
                        eligible.iter().filter(|(v, _)| v != &vid).collect();
                    if others.is_empty() {
                        continue;
                    }
                    let (ov, of) = others[rng.gen_range(0..others.len())].clone();
                    fixations
                        .at_frame(&ov, of)
                        .filter(|r| r.subject != subject)
                        .map(|r| {
                            // map into the test frame's grid proportionally
                            let fx = r.x / fixations.videos[&ov].width as f64;
                            let fy = r.y / fixations.videos[&ov].height as f64;
                            (fx * ctx.gw as f64, fy * ctx.gh as f64)
                        })
                        .collect()
                }
            };
            if train_points.is_empty() {
                continue;
            }
            let map = empirical_frame_map(&train_points, (ctx.gw, ctx.gh), sigma)?;
            let px = ((fix.x * ctx.scale).round() as usize).min(ctx.gw - 1);
            let py = ((fix.y * ctx.scale).round() as usize).min(ctx.gh - 1);
            for y in 0..ctx.gh {
                for x in 0..ctx.gw {
                    scores.push(map.at(x, y));
                    labels.push(x == px && y == py);
                }
            }
        }
    }
    if scores.is_empty() {
        return Err(Error::NoEligibleFrames);
    }
    Ok(roc(&scores, &labels))
}

/// Mean p-statistic per free-viewing subject: the probability mass of cells
/// whose active-group density is at or below the density at the free
/// viewer's fixated cell.
pub fn task_influence_pvalues(
    active: &FixationSet,
    free: &FixationSet,
    params: &SpatialParams,
) -> Result<BTreeMap<String, f64>> {
    if active.is_empty() || free.is_empty() {
        return Err(Error::InsufficientSubjects);
    }
    // frames where the active group fixates; the free viewers are scored there
    let eligible = eligible_frames(active, params.skip_ms, 1);
    if eligible.is_empty() {
        return Err(Error::NoEligibleFrames);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();

    for _ in 0..params.n_samples {
        let (vid, frame) = eligible[rng.gen_range(0..eligible.len())].clone();
        if !free.videos.contains_key(&vid) {
            continue;
        }
        let ctx = grid_ctx(active, &vid, params.downsample);
        let sigma = params.sigma_px * ctx.scale;
        let points: Vec<(f64, f64)> = active
            .at_frame(&vid, frame)
            .map(|r| (r.x * ctx.scale, r.y * ctx.scale))
            .collect();
        if points.is_empty() {
            continue;
        }
        let map = empirical_frame_map(&points, (ctx.gw, ctx.gh), sigma)?;
        for fix in free.at_frame(&vid, frame) {
            let px = ((fix.x * ctx.scale).round() as usize).min(ctx.gw - 1);
            let py = ((fix.y * ctx.scale).round() as usize).min(ctx.gh - 1);
            let density = map.at(px, py);
            let p: f64 = map.values.iter().filter(|&&v| v <= density).sum();
            let e = sums.entry(fix.subject.clone()).or_insert((0.0, 0));
            e.0 += p;
            e.1 += 1;
        }
    }
    if sums.is_empty() {
        return Err(Error::NoEligibleFrames);
    }
    Ok(sums.into_iter().map(|(s, (total, n))| (s, total / n as f64)).collect())
}

/// Aggregate sequential-consistency numbers for one scope (video, label or
/// corpus), inter-subject vs the random-baseline control.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SequentialStats {
    pub alignment_inter: f64,
    pub alignment_random: f64,
    pub markov_inter: f64,
    pub markov_random: f64,
    pub n_videos: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequentialReport {
    pub per_video: BTreeMap<String, SequentialStats>,
    pub per_label: BTreeMap<String, SequentialStats>,
    pub overall: SequentialStats,
}

fn mean_pairwise_alignment(strings: &[AoiString]) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..strings.len() {
        for j in (i + 1)..strings.len() {
            let (_, norm) =
                align_score(&strings[i].symbols, &strings[j].symbols, AlignWeights::default());
            total += norm;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}

fn aggregate(per_video: &[(&String, &SequentialStats)]) -> SequentialStats {
    let n = per_video.len();
    let mut agg = SequentialStats { n_videos: n, ..Default::default() };
    if n == 0 {
        return agg;
    }
    for (_, s) in per_video {
        agg.alignment_inter += s.alignment_inter;
        agg.alignment_random += s.alignment_random;
        agg.markov_inter += s.markov_inter;
        agg.markov_random += s.markov_random;
    }
    let nf = n as f64;
    agg.alignment_inter /= nf;
    agg.alignment_random /= nf;
    agg.markov_inter /= nf;
    agg.markov_random /= nf;
    agg
}

/// Per-video AOI discovery, string building, and both sequential metrics
/// with their 10-string random controls, aggregated per action label and
/// overall. Volumes, when provided, drive AOI lifespan extension before the
/// random baselines are drawn.
pub fn sequential_consistency_report(
    fixations: &FixationSet,
    volumes: &BTreeMap<String, Volume>,
    aoi_params: &AoiParams,
    laplace_add: f64,
    rng_seed: u64,
) -> Result<SequentialReport> {
    let mut per_video = BTreeMap::new();
    for (vid, meta) in &fixations.videos {
        if fixations.for_video(vid).next().is_none() {
            continue;
        }
        let tracks = aoi::discover_aois(fixations, vid, aoi_params)?;
        let strings = aoi::assign_scanpaths(fixations, vid, &tracks);
        if strings.len() < 2 {
            continue;
        }
        let extended = match volumes.get(vid) {
            Some(vol) => {
                aoi::extend_aois(&tracks, vol, meta.fovea_px.round() as i64, 0.7)
            }
            None => tracks.clone(),
        };
        let lengths: Vec<usize> = strings.iter().map(|s| s.symbols.len()).collect();
        let randoms = aoi::random_aoi_strings(&extended, 10, &lengths, rng_seed);
        let a = tracks.len();
        let stats = SequentialStats {
            alignment_inter: mean_pairwise_alignment(&strings),
            alignment_random: mean_pairwise_alignment(&randoms),
            markov_inter: markov_consistency(&strings, a, laplace_add)?,
            markov_random: markov_consistency(&randoms, a, laplace_add)?,
            n_videos: 1,
        };
        per_video.insert(vid.clone(), stats);
    }

    let mut by_label: BTreeMap<String, Vec<(&String, &SequentialStats)>> = BTreeMap::new();
    for (vid, stats) in &per_video {
        let label = fixations.videos[vid].label.clone().unwrap_or_else(|| "unlabeled".into());
        by_label.entry(label).or_default().push((vid, stats));
    }
    let per_label = by_label.into_iter().map(|(l, v)| (l, aggregate(&v))).collect();
    let all: Vec<(&String, &SequentialStats)> = per_video.iter().collect();
    let overall = aggregate(&all);
    Ok(SequentialReport { per_video, per_label, overall })
}
