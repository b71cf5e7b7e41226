//! End-to-end action recognition: sample interest points, extract
//! descriptors, quantize against a vocabulary, build kernels, and train
//! one-vs-all classifiers. Shared by the CLI `recognize` command and the
//! integration tests.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{
    hog3d, mbh, motion_feature_map, Channel, GridConfig, MotionMapKind, MotionMapParams,
};
use crate::fixation::{FixationSet, FrameGrid};
use crate::flow::horn_schunck_flow;
use crate::learn::{
    average_precision, bow_encode, chi2_rbf_gram, kernel_svm_dual, kmeans, o2p_encode,
};
use crate::saliency::{
    build_gt_saliency, center_bias_saliency, fixation_interest_points, sample_interest_points,
    FixationOperator, InterestPoint, Normalization, SaliencyMap, SampleRate,
};
use crate::synth::SynthVideo;
use crate::volume::Volume;

/// One video ready for recognition: its geometry/label and pixel data.
#[derive(Debug, Clone)]
pub struct VideoItem {
    pub meta: crate::fixation::VideoMeta,
    pub volume: Volume,
}

impl From<SynthVideo> for VideoItem {
    fn from(v: SynthVideo) -> Self {
        VideoItem { meta: v.meta, volume: v.volume }
    }
}

/// Where interest points come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    /// Locations of high spatio-temporal cornerness.
    Harris,
    /// Uniform over the volume.
    Uniform,
    /// Distance-to-center prior.
    CenterBias,
    /// Drawn from a saliency map (provided, or built from the fixation
    /// log when none is supplied).
    Saliency,
    /// Directly at recorded fixations.
    Fixations,
}

/// Per-video feature encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoder {
    /// L1-normalized visual-word histogram with a chi-square RBF kernel.
    Bow,
    /// Log-covariance pooling with a linear kernel.
    O2p,
}

/// Tunables of one recognition run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub sampler: SamplerKind,
    pub encoder: Encoder,
    /// Interest points drawn per frame (ignored by the fixation sampler).
    pub points_per_frame: usize,
    /// Descriptor grid; HoG and MBH over it form the two channels.
    pub grid: GridConfig,
    /// Spatial/temporal scale range of sampled points.
    pub scale_range: (f64, f64),
    pub vocab_k: usize,
    /// chi-square RBF bandwidth.
    pub gamma: f64,
    pub svm_c: f64,
    /// Fraction of each class used for training.
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sampler: SamplerKind::Uniform,
            encoder: Encoder::Bow,
            points_per_frame: 4,
            grid: GridConfig::new(2, 2, 2),
            scale_range: (2.0, 4.0),
            vocab_k: 64,
            gamma: 1.0,
            svm_c: 10.0,
            train_fraction: 0.5,
            seed: 0,
        }
    }
}

/// Outcome of one run: per-class average precision on the held-out split
/// plus multi-class accuracy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineReport {
    pub per_class_ap: Vec<(String, f64)>,
    pub mean_ap: f64,
    pub accuracy: f64,
    pub n_train: usize,
    pub n_test: usize,
}

/// Normalizes a stack of grids into a per-frame saliency map.
fn grids_to_map(video_id: &str, mut grids: Vec<FrameGrid>) -> SaliencyMap {
    for g in &mut grids {
        if g.sum() <= 0.0 {
            *g = FrameGrid::uniform(g.width, g.height);
        } else {
            g.normalize();
        }
    }
    SaliencyMap {
        video_id: video_id.into(),
        frames: grids,
        normalization: Normalization::PerFrame,
    }
}

/// Draws the interest points of one video under the configured sampler.
fn sample_points(
    video: &VideoItem,
    flows: &[crate::flow::FlowField],
    fixations: &FixationSet,
    external_map: Option<&SaliencyMap>,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<Vec<InterestPoint>> {
    let id = &video.meta.video_id;
    let (w, h, t) = (
        video.meta.width as usize,
        video.meta.height as usize,
        video.meta.frame_count as usize,
    );
    let rate = SampleRate::Fixed(cfg.points_per_frame);
    let map = match cfg.sampler {
        SamplerKind::Uniform => SaliencyMap::uniform(id, w, h, t),
        SamplerKind::CenterBias => center_bias_saliency(id, w, h, t),
        SamplerKind::Harris => {
            let grids = motion_feature_map(
                MotionMapKind::Harris3d,
                &video.volume,
                flows,
                &MotionMapParams::default(),
            )?;
            grids_to_map(id, grids)
        }
        SamplerKind::Saliency => match external_map {
            Some(m) => m.clone(),
            None => build_gt_saliency(fixations, id, video.meta.fovea_px, 0.1, 1)?,
        },
        SamplerKind::Fixations => {
            let mid = 0.5 * (cfg.scale_range.0 + cfg.scale_range.1);
            return Ok(fixation_interest_points(
                fixations,
                id,
                FixationOperator::PerFixation3d,
                mid,
            ));
        }
    };
    Ok(sample_interest_points(&map, &rate, cfg.scale_range, seed))
}

/// HoG and MBH descriptor sets of one video at its interest points.
fn video_descriptors(
    video: &VideoItem,
    flows: &[crate::flow::FlowField],
    points: &[InterestPoint],
    grid: &GridConfig,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut hogs = Vec::new();
    let mut mbhs = Vec::new();
    for p in points {
        if let Ok(d) = hog3d(&video.volume, p, grid) {
            debug_assert_eq!(d.channel, Channel::Hog);
            hogs.push(d.values);
        }
        if let Ok(d) = mbh(flows, p, grid) {
            mbhs.push(d.values);
        }
    }
    (hogs, mbhs)
}

/// Deterministic per-class split of video indices into train/test.
fn split_indices(
    labels: &[String],
    train_fraction: f64,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (_, mut idx) in by_class {
        idx.shuffle(&mut rng);
        let n_train = ((idx.len() as f64 * train_fraction).round() as usize)
            .clamp(1, idx.len().saturating_sub(1).max(1));
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Linear-kernel Gram rows for the o2p encoder.
fn linear_gram(x: &[Vec<f64>], y: &[Vec<f64>]) -> Vec<Vec<f64>> {
    x.iter()
        .map(|a| {
            y.iter()
                .map(|b| a.iter().zip(b.iter()).map(|(p, q)| p * q).sum::<f64>())
                .collect()
        })
        .collect()
}

/// Runs the whole recognition experiment on a labelled corpus.
///
/// Videos are split per class into train/test; descriptors from training
/// videos build the vocabulary; HoG and MBH give one kernel each, summed
/// with equal weight; one-vs-all kernel SVMs produce per-class scores.
pub fn run_recognition(
    videos: &[VideoItem],
    fixations: &FixationSet,
    external_maps: Option<&BTreeMap<String, SaliencyMap>>,
    cfg: &PipelineConfig,
) -> Result<PipelineReport> {
    let labels: Vec<String> = videos
        .iter()
        .map(|v| v.meta.label.clone().ok_or(Error::DegenerateLabels))
        .collect::<Result<_>>()?;
    let classes: Vec<String> = {
        let mut c = labels.clone();
        c.sort();
        c.dedup();
        c
    };
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }

    // per-video interest points and raw descriptors
    let mut hog_sets = Vec::with_capacity(videos.len());
    let mut mbh_sets = Vec::with_capacity(videos.len());
    for (vi, video) in videos.iter().enumerate() {
        let flows = horn_schunck_flow(&video.volume, 0.1, 20)?;
        let external = external_maps.and_then(|m| m.get(&video.meta.video_id));
        let seed = cfg.seed.wrapping_add(0x51ed_2700u64.wrapping_mul(vi as u64 + 1));
        let points = sample_points(video, &flows, fixations, external, cfg, seed)?;
        let (hogs, mbhs) = video_descriptors(video, &flows, &points, &cfg.grid);
        hog_sets.push(hogs);
        mbh_sets.push(mbhs);
    }

    let (train, test) = split_indices(&labels, cfg.train_fraction, cfg.seed);

    // per-channel video encodings
    let encode_channel = |sets: &[Vec<Vec<f64>>]| -> Result<Vec<Vec<f64>>> {
        match cfg.encoder {
            Encoder::Bow => {
                let train_descs: Vec<Vec<f64>> =
                    train.iter().flat_map(|&i| sets[i].iter().cloned()).collect();
                let k = cfg.vocab_k.min(train_descs.len());
                let vocab = kmeans(&train_descs, k, cfg.seed, 50)?;
                Ok(sets.iter().map(|s| bow_encode(s, &vocab).values).collect())
            }
            Encoder::O2p => sets.iter().map(|s| o2p_encode(s, 1e-3, 0.5)).collect(),
        }
    };
    let channels = [encode_channel(&hog_sets)?, encode_channel(&mbh_sets)?];

    // equal-weight sum of the per-channel kernels
    let n = videos.len();
    let mut gram = vec![vec![0.0f64; n]; n];
    for feats in &channels {
        let g = match cfg.encoder {
            Encoder::Bow => chi2_rbf_gram(feats, feats, cfg.gamma)?,
            Encoder::O2p => linear_gram(feats, feats),
        };
        for i in 0..n {
            for j in 0..n {
                gram[i][j] += g[i][j] / channels.len() as f64;
            }
        }
    }

    // one-vs-all kernel SVMs on the training block
    let nt = train.len();
    let mut train_gram = vec![0.0f64; nt * nt];
    for (a, &i) in train.iter().enumerate() {
        for (b, &j) in train.iter().enumerate() {
            train_gram[a * nt + b] = gram[i][j];
        }
    }
    let mut class_scores: Vec<Vec<f64>> = Vec::with_capacity(classes.len());
    for class in &classes {
        let y: Vec<f64> =
            train.iter().map(|&i| if &labels[i] == class { 1.0 } else { -1.0 }).collect();
        let coef = kernel_svm_dual(&train_gram, &y, nt, cfg.svm_c);
        let scores: Vec<f64> = test
            .iter()
            .map(|&j| train.iter().enumerate().map(|(a, &i)| coef[a] * gram[i][j]).sum())
            .collect();
        class_scores.push(scores);
    }

    // held-out AP per class and multi-class accuracy
    let mut per_class_ap = Vec::with_capacity(classes.len());
    for (ci, class) in classes.iter().enumerate() {
        let truth: Vec<bool> = test.iter().map(|&i| &labels[i] == class).collect();
        let ap = average_precision(&class_scores[ci], &truth)?;
        per_class_ap.push((class.clone(), ap));
    }
    let mean_ap =
        per_class_ap.iter().map(|(_, ap)| ap).sum::<f64>() / per_class_ap.len() as f64;
    let mut correct = 0usize;
    for (ti, &i) in test.iter().enumerate() {
        let best = (0..classes.len())
            .max_by(|&a, &b| class_scores[a][ti].partial_cmp(&class_scores[b][ti]).unwrap())
            .unwrap();
        if classes[best] == labels[i] {
            correct += 1;
        }
    }
    Ok(PipelineReport {
        per_class_ap,
        mean_ap,
        accuracy: correct as f64 / test.len() as f64,
        n_train: train.len(),
        n_test: test.len(),
    })
}

/// Applies `run_recognition` across seeds and reports mean/stdev of
/// accuracy and mean AP.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedSweep {
    pub seeds: Vec<u64>,
    pub mean_accuracy: f64,
    pub stdev_accuracy: f64,
    pub mean_ap: f64,
    pub stdev_ap: f64,
}

pub fn run_seed_sweep(
    videos: &[VideoItem],
    fixations: &FixationSet,
    external_maps: Option<&BTreeMap<String, SaliencyMap>>,
    cfg: &PipelineConfig,
    seeds: &[u64],
) -> Result<SeedSweep> {
    let mut accs = Vec::with_capacity(seeds.len());
    let mut aps = Vec::with_capacity(seeds.len());
    for &s in seeds {
        let mut c = cfg.clone();
        c.seed = s;
        let report = run_recognition(videos, fixations, external_maps, &c)?;
        accs.push(report.accuracy);
        aps.push(report.mean_ap);
    }
    let stats = |v: &[f64]| -> (f64, f64) {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
        (mean, var.sqrt())
    };
    let (mean_accuracy, stdev_accuracy) = stats(&accs);
    let (mean_ap, stdev_ap) = stats(&aps);
    Ok(SeedSweep {
        seeds: seeds.to_vec(),
        mean_accuracy,
        stdev_accuracy,
        mean_ap,
        stdev_ap,
    })
}
