//! Saliency maps over video volumes: ground-truth construction from
//! fixations, the KL and AUC comparison measures, baseline maps, linear map
//! combination and saliency-driven interest point sampling.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixation::{empirical_frame_map, FixationSet, FrameGrid};
use crate::roc::roc;

/// How a [`SaliencyMap`]'s mass is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// All cells over all frames sum to 1.
    PerVolume,
    /// Each frame sums to 1.
    PerFrame,
}

/// A sequence of non-negative grids forming a probability distribution over
/// the spatio-temporal volume (or over each frame).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaliencyMap {
    pub video_id: String,
    pub frames: Vec<FrameGrid>,
    pub normalization: Normalization,
}

impl SaliencyMap {
    pub fn uniform(video_id: &str, width: usize, height: usize, t: usize) -> Self {
        let cell = 1.0 / (width * height * t) as f64;
        let grid = FrameGrid {
            width,
            height,
            values: vec![cell; width * height],
            empty: false,
        };
        SaliencyMap {
            video_id: video_id.into(),
            frames: vec![grid; t],
            normalization: Normalization::PerVolume,
        }
    }

    pub fn width(&self) -> usize {
        self.frames[0].width
    }

    pub fn height(&self) -> usize {
        self.frames[0].height
    }

    pub fn total(&self) -> f64 {
        self.frames.iter().map(|f| f.sum()).sum()
    }

    pub fn same_shape(&self, other: &SaliencyMap) -> bool {
        self.frames.len() == other.frames.len()
            && self.width() == other.width()
            && self.height() == other.height()
    }
}

/// Builds the ground-truth saliency distribution from fixations of one
/// video: per-frame blurred fixation maps, each carrying 1/T of the volume
/// mass, mixed with the uniform distribution by weight `alpha`.
///
/// Frames without fixations contribute uniform frame mass. `alpha = 1`
/// yields the exact uniform volume distribution, `alpha = 0` the pure
/// fixation-driven one.
pub fn build_gt_saliency(
    fixations: &FixationSet,
    video_id: &str,
    sigma: f64,
    alpha: f64,
    downsample: usize,
) -> Result<SaliencyMap> {
    let meta = fixations
        .videos
        .get(video_id)
        .ok_or_else(|| Error::UnknownVideo(video_id.to_string()))?;
    let gw = (meta.width as usize / downsample).max(1);
    let gh = (meta.height as usize / downsample).max(1);
    let t = meta.frame_count as usize;
    let scale = 1.0 / downsample as f64;
    let sigma = (sigma * scale).max(1e-6);
    let inv_t = 1.0 / t as f64;
    let uniform_cell = 1.0 / (gw * gh * t) as f64;

    let mut frames = Vec::with_capacity(t);
    for frame in 0..meta.frame_count {
        let points: Vec<(f64, f64)> = fixations
            .at_frame(video_id, frame)
            .map(|r| (r.x * scale, r.y * scale))
            .collect();
        let mut g = empirical_frame_map(&points, (gw, gh), sigma)?;
        for v in &mut g.values {
            *v = (1.0 - alpha) * (*v * inv_t) + alpha * uniform_cell;
        }
        frames.push(g);
    }
    Ok(SaliencyMap {
        video_id: video_id.to_string(),
        frames,
        normalization: Normalization::PerVolume,
    })
}

fn floored(values: &[f64], epsilon: f64) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().map(|&x| x.max(epsilon)).collect();
    let s: f64 = v.iter().sum();
    for x in &mut v {
        *x /= s;
    }
    v
}

/// KL divergence between a predicted and a ground-truth
/// saliency map, both floored at `epsilon` and renormalized. Natural log.
/// Per-frame maps yield the mean of per-frame divergences.
pub fn kl_divergence(pred: &SaliencyMap, truth: &SaliencyMap, epsilon: f64) -> Result<f64> {
    if !pred.same_shape(truth) || pred.normalization != truth.normalization {
        return Err(Error::DimensionMismatch("saliency maps differ in shape or mode".into()));
    }
    let kl = |p: &[f64], s: &[f64]| -> f64 {
        p.iter().zip(s.iter()).map(|(&pi, &si)| if pi > 0.0 { pi * (pi / si).ln() } else { 0.0 }).sum()
    };
    match pred.normalization {
        Normalization::PerFrame => {
            let mut total = 0.0;
            for (pf, sf) in pred.frames.iter().zip(truth.frames.iter()) {
                total += kl(&floored(&pf.values, epsilon), &floored(&sf.values, epsilon));
            }
            Ok(total / pred.frames.len() as f64)
        }
        Normalization::PerVolume => {
            let p: Vec<f64> = pred.frames.iter().flat_map(|f| f.values.iter().copied()).collect();
            let s: Vec<f64> = truth.frames.iter().flat_map(|f| f.values.iter().copied()).collect();
            Ok(kl(&floored(&p, epsilon), &floored(&s, epsilon)))
        }
    }
}

/// Mean per-frame, tie-corrected AUC of the map as a fixated-vs-rest pixel
/// classifier. `points` are (x, y, frame) in the map's grid coordinates.
pub fn saliency_auc(pred: &SaliencyMap, points: &[(usize, usize, usize)]) -> Result<f64> {
    let mut by_frame: std::collections::BTreeMap<usize, Vec<(usize, usize)>> = Default::default();
    for &(x, y, t) in points {
        by_frame.entry(t).or_default().push((x, y));
    }
    if by_frame.is_empty() {
        return Err(Error::NoFixatedFrames);
    }
    let (w, h) = (pred.width(), pred.height());
    let mut total = 0.0;
    for (&t, fixed) in &by_frame {
        let grid = &pred.frames[t];
        let mut labels = vec![false; w * h];
        for &(x, y) in fixed {
            labels[y * w + x] = true;
        }
        total += roc(&grid.values, &labels).auc;
    }
    Ok(total / by_frame.len() as f64)
}

/// Center-bias baseline: salience decreases with distance from the frame
/// center, normalized to a probability grid.
pub fn center_bias_map(width: usize, height: usize) -> FrameGrid {
    let (cx, cy) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
    let max_d = (cx * cx + cy * cy).sqrt();
    let mut g = FrameGrid::zeros(width, height);
    for y in 0..height {
        for x in 0..width {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            *g.at_mut(x, y) = max_d - d;
        }
    }
    g.normalize();
    g
}

/// Center-bias saliency over a whole volume, one identical frame repeated.
pub fn center_bias_saliency(video_id: &str, width: usize, height: usize, t: usize) -> SaliencyMap {
    let mut frame = center_bias_map(width, height);
    for v in &mut frame.values {
        *v /= t as f64;
    }
    SaliencyMap {
        video_id: video_id.into(),
        frames: vec![frame; t],
        normalization: Normalization::PerVolume,
    }
}

/// Ridge-regularized linear classifier over per-pixel channel value rows.
/// Returns (weights, bias). Labels are fixated/not-fixated indicators.
pub fn combine_weights(
    rows: &[Vec<f64>],
    labels: &[bool],
    regularization: f64,
) -> Result<(Vec<f64>, f64)> {
    let n = rows.len();
    if n == 0 || labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(Error::DegenerateLabels);
    }
    let d = rows[0].len();
    // augmented design matrix [X | 1], targets +-1
    let mut xtx = DMatrix::<f64>::zeros(d + 1, d + 1);
    let mut xty = DVector::<f64>::zeros(d + 1);
    for (row, &label) in rows.iter().zip(labels.iter()) {
        let y = if label { 1.0 } else { -1.0 };
        for i in 0..=d {
            let xi = if i < d { row[i] } else { 1.0 };
            xty[i] += xi * y;
            for j in 0..=d {
                let xj = if j < d { row[j] } else { 1.0 };
                xtx[(i, j)] += xi * xj;
            }
        }
    }
    for i in 0..d {
        xtx[(i, i)] += regularization;
    }
    let sol = xtx
        .lu()
        .solve(&xty)
        .ok_or_else(|| Error::DimensionMismatch("singular ridge system".into()))?;
    let weights = sol.as_slice()[..d].to_vec();
    Ok((weights, sol[d]))
}

/// Applies channel weights and renormalizes each frame after shifting
/// scores to non-negative.
pub fn apply_combination(
    channels: &[SaliencyMap],
    weights: &[f64],
    bias: f64,
) -> Result<SaliencyMap> {
    if channels.is_empty() || channels.len() != weights.len() {
        return Err(Error::DimensionMismatch("channel/weight count mismatch".into()));
    }
    let base = &channels[0];
    for c in channels {
        if !c.same_shape(base) {
            return Err(Error::DimensionMismatch("channel shapes differ".into()));
        }
    }
    let (w, h, t) = (base.width(), base.height(), base.frames.len());
    let mut frames = Vec::with_capacity(t);
    for f in 0..t {
        let mut g = FrameGrid::zeros(w, h);
        for i in 0..(w * h) {
            let mut score = bias;
            for (c, &wt) in channels.iter().zip(weights.iter()) {
                score += wt * c.frames[f].values[i];
            }
            g.values[i] = score;
        }
        let min = g.values.iter().cloned().fold(f64::INFINITY, f64::min);
        for v in &mut g.values {
            *v -= min;
        }
        if g.sum() <= 0.0 {
            g = FrameGrid::uniform(w, h);
        } else {
            g.normalize();
        }
        frames.push(g);
    }
    Ok(SaliencyMap {
        video_id: base.video_id.clone(),
        frames,
        normalization: Normalization::PerFrame,
    })
}

/// A descriptor sampling site in the video volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterestPoint {
    pub x: f64,
    pub y: f64,
    pub t: u32,
    pub sigma_s: f64,
    pub sigma_t: f64,
}

/// Per-frame sample counts for [`sample_interest_points`].
#[derive(Debug, Clone)]
pub enum SampleRate {
    /// Match an external detector's per-frame firing counts.
    MatchCounts(Vec<usize>),
    /// Fixed number of points per frame.
    Fixed(usize),
}

/// Draws interest points i.i.d. from the map's per-frame conditional
/// distributions; spatial and temporal scales are independently uniform in
/// `scale_range`. Deterministic under the seed.
pub fn sample_interest_points(
    map: &SaliencyMap,
    rate: &SampleRate,
    scale_range: (f64, f64),
    rng_seed: u64,
) -> Vec<InterestPoint> {
    let (lo, hi) = scale_range;
    assert!(lo <= hi);
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    let (w, h) = (map.width(), map.height());
    let mut out = Vec::new();
    for (t, grid) in map.frames.iter().enumerate() {
        let count = match rate {
            SampleRate::MatchCounts(c) => c.get(t).copied().unwrap_or(0),
            SampleRate::Fixed(n) => *n,
        };
        if count == 0 {
            continue;
        }
        let total = grid.sum();
        let mut cdf = Vec::with_capacity(w * h);
        let mut acc = 0.0;
        for &v in &grid.values {
            acc += if total > 0.0 { v / total } else { 1.0 / (w * h) as f64 };
            cdf.push(acc);
        }
        for _ in 0..count {
            let u = rng.gen::<f64>();
            let cell = cdf.partition_point(|&c| c < u).min(w * h - 1);
            out.push(InterestPoint {
                x: (cell % w) as f64,
                y: (cell / w) as f64,
                t: t as u32,
                sigma_s: rng.gen_range(lo..=hi),
                sigma_t: rng.gen_range(lo..=hi),
            });
        }
    }
    out
}

/// Fixation-derived interest operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixationOperator {
    /// One 2D point per frame of each fixation's lifetime.
    PerFrame2d,
    /// One 3D point per fixation at the span midpoint, temporal scale
    /// half the fixation length.
    PerFixation3d,
}

/// Default temporal scale of 2D fixation points (frames).
pub const FIXATION_2D_SIGMA_T: f64 = 2.0;

pub fn fixation_interest_points(
    fixations: &FixationSet,
    video_id: &str,
    mode: FixationOperator,
    sigma_s: f64,
) -> Vec<InterestPoint> {
    let mut out = Vec::new();
    for r in fixations.for_video(video_id) {
        match mode {
            FixationOperator::PerFrame2d => {
                for t in r.start_frame..=r.end_frame {
                    out.push(InterestPoint {
                        x: r.x,
                        y: r.y,
                        t,
                        sigma_s,
                        sigma_t: FIXATION_2D_SIGMA_T,
                    });
                }
            }
            FixationOperator::PerFixation3d => {
                let len = (r.end_frame - r.start_frame + 1) as f64;
                out.push(InterestPoint {
                    x: r.x,
                    y: r.y,
                    t: (r.start_frame + r.end_frame) / 2,
                    sigma_s,
                    sigma_t: 0.5 * len,
                });
            }
        }
    }
    out
}

/// Fraction of interest points within `fovea_px` of some fixation active at
/// the point's frame.
pub fn foveation_rate(
    points: &[InterestPoint],
    fixations: &FixationSet,
    video_id: &str,
    fovea_px: f64,
) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let r2 = fovea_px * fovea_px;
    let hits = points
        .iter()
        .filter(|p| {
            fixations.at_frame(video_id, p.t).any(|f| {
                let (dx, dy) = (f.x - p.x, f.y - p.y);
                dx * dx + dy * dy <= r2
            })
        })
        .count();
    hits as f64 / points.len() as f64
}

const SALM_MAGIC: &[u8; 4] = b"SALM";

/// Writes the SALM binary container: magic, u16 version, u32 width, height,
/// frames, u8 normalization mode, then f32 LE planes, row-major frame-major.
pub fn write_salm<W: Write>(w: &mut W, map: &SaliencyMap) -> Result<()> {
    w.write_all(SALM_MAGIC)?;
    w.write_all(&1u16.to_le_bytes())?;
    w.write_all(&(map.width() as u32).to_le_bytes())?;
    w.write_all(&(map.height() as u32).to_le_bytes())?;
    w.write_all(&(map.frames.len() as u32).to_le_bytes())?;
    let mode: u8 = match map.normalization {
        Normalization::PerVolume => 0,
        Normalization::PerFrame => 1,
    };
    w.write_all(&[mode])?;
    for frame in &map.frames {
        for &v in &frame.values {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_salm<R: Read>(r: &mut R, video_id: &str) -> Result<SaliencyMap> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SALM_MAGIC {
        return Err(Error::Format("bad SALM magic".into()));
    }
    let mut b2 = [0u8; 2];
    r.read_exact(&mut b2)?;
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let width = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let height = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let t = u32::from_le_bytes(b4) as usize;
    let mut mode = [0u8; 1];
    r.read_exact(&mut mode)?;
    let normalization = match mode[0] {
        0 => Normalization::PerVolume,
        1 => Normalization::PerFrame,
        m => return Err(Error::Format(format!("bad SALM mode {m}"))),
    };
    let mut frames = Vec::with_capacity(t);
    for _ in 0..t {
        let mut g = FrameGrid::zeros(width, height);
        for v in &mut g.values {
            r.read_exact(&mut b4)?;
            *v = f32::from_le_bytes(b4) as f64;
        }
        frames.push(g);
    }
    Ok(SaliencyMap { video_id: video_id.to_string(), frames, normalization })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixation::{FixationRecord, Group, VideoMeta};

    fn meta(w: u32, h: u32, t: u32) -> VideoMeta {
        VideoMeta {
            video_id: "v".into(),
            width: w,
            height: h,
            frame_count: t,
            fps: 25.0,
            fovea_px: 4.0,
            label: None,
        }
    }

    fn rec(frame_a: u32, frame_b: u32, x: f64, y: f64) -> FixationRecord {
        FixationRecord {
            subject: "s".into(),
            video: "v".into(),
            start_frame: frame_a,
            end_frame: frame_b,
            x,
            y,
            group: Group::Active,
        }
    }

    #[test]
    fn alpha_one_is_exactly_uniform() {
        let set = FixationSet::new(vec![rec(0, 0, 5.0, 5.0)], vec![meta(16, 8, 4)]);
        let map = build_gt_saliency(&set, "v", 2.0, 1.0, 1).unwrap();
        let cell = 1.0 / (16.0 * 8.0 * 4.0);
        for f in &map.frames {
            for &v in &f.values {
                assert_eq!(v, cell);
            }
        }
    }

    #[test]
    fn pure_fix_splits_mass_evenly_over_frames() {
        let set = FixationSet::new(vec![rec(0, 0, 8.0, 4.0)], vec![meta(16, 8, 2)]);
        let map = build_gt_saliency(&set, "v", 1.5, 0.0, 1).unwrap();
        assert!((map.frames[0].sum() - 0.5).abs() < 1e-9);
        assert!((map.frames[1].sum() - 0.5).abs() < 1e-9);
        assert!(map.frames[1].empty, "fixation-free frame is uniform-flagged");
        assert!(!map.frames[0].empty);
        assert!((map.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mixture_is_linear_in_alpha() {
        let set =
            FixationSet::new(vec![rec(0, 1, 5.0, 5.0), rec(2, 3, 10.0, 3.0)], vec![meta(16, 8, 4)]);
        let m0 = build_gt_saliency(&set, "v", 1.5, 0.0, 1).unwrap();
        let m3 = build_gt_saliency(&set, "v", 1.5, 0.3, 1).unwrap();
        let uniform = 1.0 / (16.0 * 8.0 * 4.0);
        for (f0, f3) in m0.frames.iter().zip(m3.frames.iter()) {
            for (&a, &b) in f0.values.iter().zip(f3.values.iter()) {
                assert!((b - (0.7 * a + 0.3 * uniform)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kl_identity_is_zero() {
        let set = FixationSet::new(vec![rec(0, 1, 5.0, 5.0)], vec![meta(16, 8, 2)]);
        let m = build_gt_saliency(&set, "v", 1.5, 0.1, 1).unwrap();
        let d = kl_divergence(&m, &m, 1e-8).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn kl_four_cell_hand_value() {
        let p = SaliencyMap {
            video_id: "v".into(),
            frames: vec![FrameGrid { width: 2, height: 2, values: vec![0.25; 4], empty: false }],
            normalization: Normalization::PerFrame,
        };
        let s = SaliencyMap {
            video_id: "v".into(),
            frames: vec![FrameGrid {
                width: 2,
                height: 2,
                values: vec![0.7, 0.1, 0.1, 0.1],
                empty: false,
            }],
            normalization: Normalization::PerFrame,
        };
        // direct 4-term oracle: 0.25 ln(0.25/0.7) + 3 * 0.25 ln(0.25/0.1)
        let expected = 0.25 * (0.25f64 / 0.7).ln() + 3.0 * 0.25 * (0.25f64 / 0.1).ln();
        let d = kl_divergence(&p, &s, 1e-12).unwrap();
        assert!((d - expected).abs() < 1e-9);
        assert!((d - 0.4298).abs() < 1e-3, "d = {d}");
    }

    #[test]
    fn kl_dimension_mismatch_errors() {
        let a = SaliencyMap::uniform("v", 4, 4, 2);
        let b = SaliencyMap::uniform("v", 4, 4, 3);
        assert!(matches!(kl_divergence(&a, &b, 1e-8), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn auc_constant_map_is_exactly_half() {
        let m = SaliencyMap::uniform("v", 8, 8, 3);
        let auc = saliency_auc(&m, &[(2, 3, 0), (5, 5, 1)]).unwrap();
        assert_eq!(auc, 0.5);
    }

    #[test]
    fn auc_peak_at_fixation_is_near_one() {
        let mut m = SaliencyMap::uniform("v", 8, 8, 1);
        *m.frames[0].at_mut(3, 4) = 1.0;
        let auc = saliency_auc(&m, &[(3, 4, 0)]).unwrap();
        assert!(auc > 1.0 - 1.0 / 32.0, "auc {auc}");
    }

    #[test]
    fn auc_no_points_errors() {
        let m = SaliencyMap::uniform("v", 4, 4, 1);
        assert!(matches!(saliency_auc(&m, &[]), Err(Error::NoFixatedFrames)));
    }

    #[test]
    fn auc_is_monotone_transform_invariant() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let mut m = SaliencyMap::uniform("v", 6, 6, 1);
        for v in &mut m.frames[0].values {
            *v = rng.gen::<f64>();
        }
        let pts = [(1usize, 2usize, 0usize), (4, 4, 0)];
        let base = saliency_auc(&m, &pts).unwrap();
        let mut warped = m.clone();
        for v in &mut warped.frames[0].values {
            *v = (3.0 * *v).exp(); // strictly monotone
        }
        let w = saliency_auc(&warped, &pts).unwrap();
        assert!((base - w).abs() < 1e-12);
    }

    #[test]
    fn center_bias_peaks_at_center() {
        let g = center_bias_map(3, 3);
        let max = g.values.iter().cloned().fold(0.0f64, f64::max);
        assert_eq!(g.at(1, 1), max);
        // square grid invariant under 90 degree rotation
        let sq = center_bias_map(9, 9);
        for y in 0..9 {
            for x in 0..9 {
                assert!((sq.at(x, y) - sq.at(8 - y, x)).abs() < 1e-12);
            }
        }
        // rows unimodal with peak nearest the center column
        let wide = center_bias_map(64, 48);
        for y in 0..48 {
            let row: Vec<f64> = (0..64).map(|x| wide.at(x, y)).collect();
            let peak = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            assert!(peak == 31 || peak == 32);
            for x in 1..=peak {
                assert!(row[x] >= row[x - 1] - 1e-12);
            }
            for x in (peak + 1)..64 {
                assert!(row[x] <= row[x - 1] + 1e-12);
            }
        }
    }

    #[test]
    fn delta_map_sampling_is_degenerate() {
        let mut m = SaliencyMap::uniform("v", 8, 8, 2);
        for f in &mut m.frames {
            for v in &mut f.values {
                *v = 0.0;
            }
            *f.at_mut(5, 2) = 1.0;
        }
        let pts = sample_interest_points(&m, &SampleRate::Fixed(20), (2.0, 8.0), 7);
        assert_eq!(pts.len(), 40);
        for p in &pts {
            assert_eq!((p.x, p.y), (5.0, 2.0));
            assert!(p.sigma_s >= 2.0 && p.sigma_s <= 8.0);
            assert!(p.sigma_t >= 2.0 && p.sigma_t <= 8.0);
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let m = SaliencyMap::uniform("v", 8, 8, 3);
        let a = sample_interest_points(&m, &SampleRate::Fixed(10), (2.0, 8.0), 42);
        let b = sample_interest_points(&m, &SampleRate::Fixed(10), (2.0, 8.0), 42);
        assert_eq!(a, b);
    }

    #[test]
    fn scale_mean_matches_uniform_law() {
        let m = SaliencyMap::uniform("v", 4, 4, 1);
        let pts = sample_interest_points(&m, &SampleRate::Fixed(100_000), (2.0, 8.0), 1);
        let mean: f64 = pts.iter().map(|p| p.sigma_s).sum::<f64>() / pts.len() as f64;
        assert!((mean - 5.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn fixation_operator_counts() {
        let set = FixationSet::new(vec![rec(3, 9, 5.0, 6.0)], vec![meta(16, 16, 12)]);
        let p2d = fixation_interest_points(&set, "v", FixationOperator::PerFrame2d, 3.0);
        assert_eq!(p2d.len(), 7);
        let p3d = fixation_interest_points(&set, "v", FixationOperator::PerFixation3d, 3.0);
        assert_eq!(p3d.len(), 1);
        assert_eq!(p3d[0].t, 6);
        assert!((p3d[0].sigma_t - 3.5).abs() < 1e-12);
        // span of 10 frames -> sigma_t = 5
        let set10 = FixationSet::new(vec![rec(0, 9, 5.0, 6.0)], vec![meta(16, 16, 12)]);
        let p = fixation_interest_points(&set10, "v", FixationOperator::PerFixation3d, 3.0);
        assert!((p[0].sigma_t - 5.0).abs() < 1e-12);
        let empty = FixationSet::new(vec![], vec![meta(16, 16, 12)]);
        assert!(fixation_interest_points(&empty, "v", FixationOperator::PerFrame2d, 3.0).is_empty());
    }

    #[test]
    fn foveation_rate_extremes() {
        let set = FixationSet::new(vec![rec(0, 5, 5.0, 6.0)], vec![meta(16, 16, 12)]);
        let on = fixation_interest_points(&set, "v", FixationOperator::PerFrame2d, 3.0);
        assert_eq!(foveation_rate(&on, &set, "v", 2.0), 1.0);
        let off = vec![InterestPoint { x: 1.0, y: 1.0, t: 10, sigma_s: 2.0, sigma_t: 2.0 }];
        assert_eq!(foveation_rate(&off, &set, "v", 2.0), 0.0);
        let empty = FixationSet::new(vec![], vec![meta(16, 16, 12)]);
        assert_eq!(foveation_rate(&on, &empty, "v", 2.0), 0.0);
    }

    #[test]
    fn salm_round_trip() {
        let set = FixationSet::new(vec![rec(0, 1, 5.0, 5.0)], vec![meta(16, 8, 2)]);
        let m = build_gt_saliency(&set, "v", 1.5, 0.2, 1).unwrap();
        let mut buf = Vec::new();
        write_salm(&mut buf, &m).unwrap();
        let back = read_salm(&mut buf.as_slice(), "v").unwrap();
        assert_eq!(back.normalization, Normalization::PerVolume);
        assert!(back.same_shape(&m));
        for (a, b) in m.frames.iter().zip(back.frames.iter()) {
            for (&x, &y) in a.values.iter().zip(b.values.iter()) {
                assert!((x - y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn combination_recovers_oracle_channel() {
        // channel 0 equals the truth map, channel 1 is noise
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let set = FixationSet::new(
            vec![rec(0, 0, 4.0, 4.0), rec(1, 1, 10.0, 6.0)],
            vec![meta(16, 8, 2)],
        );
        let truth = build_gt_saliency(&set, "v", 1.5, 0.05, 1).unwrap();
        let mut noise = SaliencyMap::uniform("v", 16, 8, 2);
        for f in &mut noise.frames {
            for v in &mut f.values {
                *v = rng.gen::<f64>();
            }
            f.normalize();
        }
        // training rows: per-pixel channel values, positives at fixations
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let fix_cells = [(4usize, 4usize, 0usize), (10, 6, 1)];
        for f in 0..2 {
            for y in 0..8 {
                for x in 0..16 {
                    rows.push(vec![truth.frames[f].at(x, y), noise.frames[f].at(x, y)]);
                    labels.push(fix_cells.iter().any(|&(fx, fy, ft)| (fx, fy, ft) == (x, y, f)));
                }
            }
        }
        let (w, b) = combine_weights(&rows, &labels, 1e-6).unwrap();
        let combined = apply_combination(&[truth.clone(), noise], &w, b).unwrap();
        let pts: Vec<(usize, usize, usize)> = fix_cells.to_vec();
        let combined_auc = saliency_auc(&combined, &pts).unwrap();
        let single = apply_combination(&[truth.clone()], &[1.0], 0.0).unwrap();
        let single_auc = saliency_auc(&single, &pts).unwrap();
        assert!(combined_auc >= single_auc - 0.01, "{combined_auc} vs {single_auc}");
    }

    #[test]
    fn duplicate_channels_share_weight_freely() {
        let set = FixationSet::new(vec![rec(0, 0, 4.0, 4.0)], vec![meta(16, 8, 1)]);
        let m = build_gt_saliency(&set, "v", 1.5, 0.05, 1).unwrap();
        let a = apply_combination(&[m.clone(), m.clone()], &[0.9, 0.1], 0.0).unwrap();
        let b = apply_combination(&[m.clone(), m.clone()], &[0.3, 0.7], 0.0).unwrap();
        for (fa, fb) in a.frames.iter().zip(b.frames.iter()) {
            for (&x, &y) in fa.values.iter().zip(fb.values.iter()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
