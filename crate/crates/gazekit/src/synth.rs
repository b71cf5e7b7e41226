//! Synthetic video corpus generation: small videos with a planted actor
//! trajectory, fixation logs that track the actor, and class labels, all
//! reproducible from a seed. These corpora make the whole pipeline
//! verifiable without any real recordings.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::fixation::{FixationRecord, FixationSet, Group, VideoMeta};
use crate::volume::Volume;

/// The planted actor pattern; doubles as the class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// A bright square translating along a random straight path.
    MovingSquare,
    /// A circle that toggles visibility every few frames at a fixed spot.
    BlinkingCircle,
    /// A full-height vertical bar sweeping horizontally.
    TranslatingBar,
    /// The left and right halves drift in opposite directions; the actor
    /// is the boundary between them.
    TwoMotionHalves,
}

impl Scenario {
    pub fn label(&self) -> &'static str {
        match self {
            Scenario::MovingSquare => "moving_square",
            Scenario::BlinkingCircle => "blinking_circle",
            Scenario::TranslatingBar => "translating_bar",
            Scenario::TwoMotionHalves => "two_motion_halves",
        }
    }
}

/// Geometry shared by every generated video.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthParams {
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub fps: f64,
    pub fovea_px: f64,
    /// Standard deviation of the background texture.
    pub texture: f64,
    /// Class-independent clutter: bright squares on their own straight
    /// paths, identical across scenarios, drawn under the actor.
    #[serde(default)]
    pub distractors: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            width: 64,
            height: 48,
            frame_count: 24,
            fps: 24.0,
            fovea_px: 6.0,
            texture: 0.05,
            distractors: 0,
        }
    }
}

/// One generated video with its ground-truth actor path.
#[derive(Debug, Clone)]
pub struct SynthVideo {
    pub meta: VideoMeta,
    pub volume: Volume,
    /// Actor center per frame.
    pub actor_path: Vec<(f64, f64)>,
    pub scenario: Scenario,
}

/// A full synthetic corpus: videos, a fixation log, and labels.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub videos: Vec<SynthVideo>,
    pub fixations: FixationSet,
}

fn clampf(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

/// Static per-video background texture so gradients exist everywhere.
fn textured_background(p: &SynthParams, rng: &mut ChaCha20Rng) -> Vec<f32> {
    (0..p.width * p.height)
        .map(|_| (0.3 + p.texture * (rng.gen::<f64>() - 0.5)) as f32)
        .collect()
}

fn paint_square(frame: &mut [f32], w: usize, h: usize, cx: f64, cy: f64, half: f64) {
    let x0 = (cx - half).floor().max(0.0) as usize;
    let x1 = ((cx + half).ceil() as usize).min(w.saturating_sub(1));
    let y0 = (cy - half).floor().max(0.0) as usize;
    let y1 = ((cy + half).ceil() as usize).min(h.saturating_sub(1));
    for y in y0..=y1 {
        for x in x0..=x1 {
            frame[y * w + x] = 1.0;
        }
    }
}

fn paint_circle(frame: &mut [f32], w: usize, h: usize, cx: f64, cy: f64, r: f64) {
    let x0 = (cx - r).floor().max(0.0) as usize;
    let x1 = ((cx + r).ceil() as usize).min(w.saturating_sub(1));
    let y0 = (cy - r).floor().max(0.0) as usize;
    let y1 = ((cy + r).ceil() as usize).min(h.saturating_sub(1));
    for y in y0..=y1 {
        for x in x0..=x1 {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            if dx * dx + dy * dy <= r * r {
                frame[y * w + x] = 1.0;
            }
        }
    }
}

/// Renders one video of a scenario from its own RNG stream.
fn render_video(
    scenario: Scenario,
    p: &SynthParams,
    video_id: &str,
    rng: &mut ChaCha20Rng,
) -> SynthVideo {
    let (w, h, t) = (p.width, p.height, p.frame_count);
    let background = textured_background(p, rng);
    let mut volume = Volume::zeros(w, h, t);
    let mut actor_path = Vec::with_capacity(t);

    // clutter shared by every scenario: objects that locally look like any
    // of the actors but carry no class information, so only actor-directed
    // sampling stays discriminative
    enum DistractorKind {
        MovingSquare,
        BlinkingCircle { period: usize },
        ShortBar { half_height: f64 },
    }
    struct Distractor {
        kind: DistractorKind,
        half: f64,
        x0: f64,
        y0: f64,
        ang: f64,
        speed: f64,
    }
    let clutter: Vec<Distractor> = (0..p.distractors)
        .map(|i| {
            let half = 2.0 + rng.gen::<f64>() * 2.0;
            let kind = match i % 3 {
                0 => DistractorKind::MovingSquare,
                1 => DistractorKind::BlinkingCircle {
                    period: 2 + (rng.gen::<f64>() * 3.0) as usize,
                },
                _ => DistractorKind::ShortBar { half_height: h as f64 / 6.0 },
            };
            // clutter favors the frame periphery, mirroring the central
            // framing bias of real footage
            let (x0, y0) = loop {
                let x = half + rng.gen::<f64>() * (w as f64 - 2.0 * half);
                let y = half + rng.gen::<f64>() * (h as f64 - 2.0 * half);
                let dx = (x - w as f64 / 2.0) / (w as f64 / 2.0);
                let dy = (y - h as f64 / 2.0) / (h as f64 / 2.0);
                if dx * dx + dy * dy >= 0.5 {
                    break (x, y);
                }
            };
            Distractor {
                kind,
                half,
                x0,
                y0,
                ang: rng.gen::<f64>() * std::f64::consts::TAU,
                speed: 0.5 + rng.gen::<f64>() * 1.5,
            }
        })
        .collect();
    let paint_clutter = |buf: &mut [f32], frame: usize| {
        for d in &clutter {
            let cx = clampf(d.x0 + d.ang.cos() * d.speed * frame as f64, d.half, w as f64 - d.half);
            let cy = clampf(d.y0 + d.ang.sin() * d.speed * frame as f64, d.half, h as f64 - d.half);
            match d.kind {
                DistractorKind::MovingSquare => paint_square(buf, w, h, cx, cy, d.half),
                DistractorKind::BlinkingCircle { period } => {
                    if (frame / period) % 2 == 0 {
                        paint_circle(buf, w, h, d.x0, d.y0, d.half);
                    }
                }
                DistractorKind::ShortBar { half_height } => {
                    let y0 = (d.y0 - half_height).floor().max(0.0) as usize;
                    let y1 = ((d.y0 + half_height).ceil() as usize).min(h - 1);
                    let x0 = (cx - 1.0).floor().max(0.0) as usize;
                    let x1 = ((cx + 1.0).ceil() as usize).min(w - 1);
                    for y in y0..=y1 {
                        for x in x0..=x1 {
                            buf[y * w + x] = 1.0;
                        }
                    }
                }
            }
        }
    };

    match scenario {
        Scenario::MovingSquare => {
            let half = (w.min(h) as f64 / 8.0).max(2.0);
            let margin = half + 2.0;
            // actors are framed centrally, as in real footage
            let (x0, y0) = loop {
                let x = margin + rng.gen::<f64>() * (w as f64 - 2.0 * margin);
                let y = margin + rng.gen::<f64>() * (h as f64 - 2.0 * margin);
                let dx = (x - w as f64 / 2.0) / (w as f64 / 2.0);
                let dy = (y - h as f64 / 2.0) / (h as f64 / 2.0);
                if dx * dx + dy * dy <= 0.4 {
                    break (x, y);
                }
            };
            let ang = rng.gen::<f64>() * std::f64::consts::TAU;
            let speed = 1.0 + rng.gen::<f64>();
            for frame in 0..t {
                let cx = clampf(x0 + ang.cos() * speed * frame as f64, margin, w as f64 - margin);
                let cy = clampf(y0 + ang.sin() * speed * frame as f64, margin, h as f64 - margin);
                volume.frames[frame].copy_from_slice(&background);
                paint_clutter(&mut volume.frames[frame], frame);
                paint_square(&mut volume.frames[frame], w, h, cx, cy, half);
                actor_path.push((cx, cy));
            }
        }
        Scenario::BlinkingCircle => {
            let r = (w.min(h) as f64 / 8.0).max(2.0);
            let margin = r + 2.0;
            // framed centrally, like the square
            let (cx, cy) = loop {
                let x = margin + rng.gen::<f64>() * (w as f64 - 2.0 * margin);
                let y = margin + rng.gen::<f64>() * (h as f64 - 2.0 * margin);
                let dx = (x - w as f64 / 2.0) / (w as f64 / 2.0);
                let dy = (y - h as f64 / 2.0) / (h as f64 / 2.0);
                if dx * dx + dy * dy <= 0.4 {
                    break (x, y);
                }
            };
            let period = 2 + (rng.gen::<f64>() * 3.0) as usize;
            for frame in 0..t {
                volume.frames[frame].copy_from_slice(&background);
                paint_clutter(&mut volume.frames[frame], frame);
                if (frame / period) % 2 == 0 {
                    paint_circle(&mut volume.frames[frame], w, h, cx, cy, r);
                }
                actor_path.push((cx, cy));
            }
        }
        Scenario::TranslatingBar => {
            let half = 2.0;
            let speed = 1.0 + rng.gen::<f64>() * 1.5;
            let x0 = half + rng.gen::<f64>() * (w as f64 * 0.25);
            let dir = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            for frame in 0..t {
                let span = w as f64 - 2.0 * half;
                // bounce off the edges to stay inside
                let raw = x0 - half + dir * speed * frame as f64;
                let m = raw.rem_euclid(2.0 * span);
                let cx = half + if m <= span { m } else { 2.0 * span - m };
                volume.frames[frame].copy_from_slice(&background);
                paint_clutter(&mut volume.frames[frame], frame);
                for y in 0..h {
                    for x in (cx - half).floor().max(0.0) as usize
                        ..=((cx + half).ceil() as usize).min(w - 1)
                    {
                        volume.frames[frame][y * w + x] = 1.0;
                    }
                }
                actor_path.push((cx, h as f64 / 2.0));
            }
        }
        Scenario::TwoMotionHalves => {
            // halves shear vertically in opposite directions; the motion
            // boundary is the vertical mid-line
            let speed = 1.0 + rng.gen::<f64>();
            let stripes = 6.0;
            for frame in 0..t {
                let shift = speed * frame as f64;
                for y in 0..h {
                    for x in 0..w {
                        let s = if x < w / 2 { shift } else { -shift };
                        let phase = (y as f64 + s) / h as f64 * stripes * std::f64::consts::TAU;
                        let tex = background[y * w + x] as f64;
                        volume.frames[frame][y * w + x] =
                            (0.5 + 0.4 * phase.sin() + (tex - 0.3)) as f32;
                    }
                }
                paint_clutter(&mut volume.frames[frame], frame);
                actor_path.push((w as f64 / 2.0, h as f64 / 2.0));
            }
        }
    }

    SynthVideo {
        meta: VideoMeta {
            video_id: video_id.to_string(),
            width: w as u32,
            height: h as u32,
            frame_count: t as u32,
            fps: p.fps,
            fovea_px: p.fovea_px,
            label: Some(scenario.label().to_string()),
        },
        volume,
        actor_path,
        scenario,
    }
}

/// Generates fixation records for one subject watching one video: gaze
/// follows the actor with Gaussian jitter of the given magnitude; with
/// probability `noise` a fixation is replaced by a uniform distractor.
fn subject_fixations(
    video: &SynthVideo,
    subject: &str,
    noise: f64,
    group: Group,
    rng: &mut ChaCha20Rng,
) -> Vec<FixationRecord> {
    let (w, h) = (video.meta.width as f64, video.meta.height as f64);
    let t = video.meta.frame_count;
    let mut records = Vec::new();
    let mut frame = 0u32;
    while frame < t {
        // fixation dwell of 2-4 frames
        let span = 2 + (rng.gen::<f64>() * 3.0) as u32;
        let end = (frame + span - 1).min(t - 1);
        let (ax, ay) = video.actor_path[frame as usize];
        let distract = noise > 0.0 && rng.gen::<f64>() < noise;
        let (x, y) = if distract {
            (rng.gen::<f64>() * (w - 1.0), rng.gen::<f64>() * (h - 1.0))
        } else {
            // Box-Muller jitter scaled by noise in units of the fovea
            let u1: f64 = rng.gen::<f64>().max(1e-12);
            let u2: f64 = rng.gen();
            let mag = (-2.0 * u1.ln()).sqrt() * noise * video.meta.fovea_px;
            let ang = u2 * std::f64::consts::TAU;
            (
                clampf(ax + mag * ang.cos(), 0.0, w - 1.0),
                clampf(ay + mag * ang.sin(), 0.0, h - 1.0),
            )
        };
        records.push(FixationRecord {
            subject: subject.to_string(),
            video: video.meta.video_id.clone(),
            start_frame: frame,
            end_frame: end,
            x,
            y,
            group,
        });
        frame = end + 1;
    }
    records
}

/// Builds a corpus of `n_videos` videos of one scenario with `n_subjects`
/// simulated viewers each. `noise` of 0 puts every fixation exactly on
/// the actor center. Deterministic under the seed.
pub fn synth_dataset(
    scenario: Scenario,
    n_videos: usize,
    n_subjects: usize,
    noise: f64,
    params: &SynthParams,
    rng_seed: u64,
) -> SynthCorpus {
    assert!(n_videos >= 1);
    let mut videos = Vec::with_capacity(n_videos);
    let mut records = Vec::new();
    let mut metas = Vec::with_capacity(n_videos);
    for vi in 0..n_videos {
        // one derived stream per video so corpora compose deterministically
        let mut rng = ChaCha20Rng::seed_from_u64(
            rng_seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(vi as u64 + 1)),
        );
        let video_id = format!("{}_{vi:03}", scenario.label());
        let video = render_video(scenario, params, &video_id, &mut rng);
        for si in 0..n_subjects {
            let subject = format!("s{si:02}");
            records.extend(subject_fixations(&video, &subject, noise, Group::Active, &mut rng));
        }
        metas.push(video.meta.clone());
        videos.push(video);
    }
    SynthCorpus { videos, fixations: FixationSet::new(records, metas) }
}

/// Convenience: one corpus per scenario, concatenated, for multi-class
/// experiments.
pub fn synth_multiclass(
    scenarios: &[Scenario],
    n_videos_per_class: usize,
    n_subjects: usize,
    noise: f64,
    params: &SynthParams,
    rng_seed: u64,
) -> SynthCorpus {
    let mut videos = Vec::new();
    let mut records = Vec::new();
    let mut metas = Vec::new();
    for (ci, &s) in scenarios.iter().enumerate() {
        let corpus =
            synth_dataset(s, n_videos_per_class, n_subjects, noise, params, rng_seed + ci as u64);
        records.extend(corpus.fixations.records);
        metas.extend(corpus.fixations.videos.into_values());
        videos.extend(corpus.videos);
    }
    SynthCorpus { videos, fixations: FixationSet::new(records, metas) }
}
