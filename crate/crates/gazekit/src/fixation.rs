//! Fixation data model, log ingestion and the rasterize-and-blur primitive.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Viewing condition under which a fixation stream was recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Active,
    Free,
}

/// One fixation: a subject resting their gaze on a point for a span of frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixationRecord {
    pub subject: String,
    pub video: String,
    pub start_frame: u32,
    pub end_frame: u32,
    pub x: f64,
    pub y: f64,
    pub group: Group,
}

impl FixationRecord {
    /// True when the fixation is active at `frame`.
    pub fn covers(&self, frame: u32) -> bool {
        self.start_frame <= frame && frame <= self.end_frame
    }
}

/// Per-video geometry. `fovea_px` is the angular fovea radius mapped to
/// pixels for the recording geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoMeta {
    pub video_id: String,
    pub width: u32,
    pub height: u32,
    pub frame_count: u32,
    pub fps: f64,
    pub fovea_px: f64,
    #[serde(default)]
    pub label: Option<String>,
}

/// A validated corpus of fixation records plus the videos they refer to.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FixationSet {
    pub records: Vec<FixationRecord>,
    pub videos: BTreeMap<String, VideoMeta>,
}

impl FixationSet {
    pub fn new(mut records: Vec<FixationRecord>, videos: Vec<VideoMeta>) -> Self {
        records.sort_by(|a, b| {
            (&a.subject, &a.video, a.start_frame).cmp(&(&b.subject, &b.video, b.start_frame))
        });
        let videos = videos.into_iter().map(|v| (v.video_id.clone(), v)).collect();
        FixationSet { records, videos }
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records for one video, preserving order.
    pub fn for_video<'a>(&'a self, video_id: &'a str) -> impl Iterator<Item = &'a FixationRecord> {
        self.records.iter().filter(move |r| r.video == video_id)
    }

    /// Records of one video active at `frame`.
    pub fn at_frame<'a>(
        &'a self,
        video_id: &'a str,
        frame: u32,
    ) -> impl Iterator<Item = &'a FixationRecord> {
        self.for_video(video_id).filter(move |r| r.covers(frame))
    }

    /// Distinct subject ids, sorted.
    pub fn subjects(&self) -> Vec<String> {
        let mut s: Vec<String> = self.records.iter().map(|r| r.subject.clone()).collect();
        s.sort();
        s.dedup();
        s
    }

    /// Keep only records of one group.
    pub fn filter_group(&self, group: Group) -> FixationSet {
        FixationSet {
            records: self.records.iter().filter(|r| r.group == group).cloned().collect(),
            videos: self.videos.clone(),
        }
    }
}

/// Maps an angular radius (degrees) to screen pixels for a recording setup.
///
/// `distance_cm` is the eye-to-screen distance, `screen_cm`/`screen_px` the
/// physical extent and resolution along one screen axis.
pub fn angle_to_pixels(angle_deg: f64, distance_cm: f64, screen_cm: f64, screen_px: f64) -> f64 {
    let span_cm = distance_cm * angle_deg.to_radians().tan();
    span_cm * screen_px / screen_cm
}

/// Log serialization formats accepted by [`parse_fixation_log`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Jsonl,
    Csv,
}

#[derive(Deserialize)]
struct RawRecord {
    subject: String,
    video: String,
    start_frame: u32,
    end_frame: u32,
    x: f64,
    y: f64,
    group: Group,
}

fn validate(raw: RawRecord, line: usize, videos: &BTreeMap<String, VideoMeta>) -> Result<FixationRecord> {
    let meta = videos
        .get(&raw.video)
        .ok_or_else(|| Error::UnknownVideo(raw.video.clone()))?;
    let in_bounds = raw.x >= 0.0
        && raw.x < meta.width as f64
        && raw.y >= 0.0
        && raw.y < meta.height as f64
        && raw.end_frame < meta.frame_count
        && raw.start_frame <= raw.end_frame;
    if !in_bounds {
        return Err(Error::OutOfBounds(line));
    }
    Ok(FixationRecord {
        subject: raw.subject,
        video: raw.video,
        start_frame: raw.start_frame,
        end_frame: raw.end_frame,
        x: raw.x,
        y: raw.y,
        group: raw.group,
    })
}

/// Parses and validates a fixation log against a video manifest.
///
/// Records referencing unknown videos or lying outside the video bounds are
/// rejected with their line number.
pub fn parse_fixation_log<R: BufRead>(
    reader: R,
    format: LogFormat,
    manifest: &[VideoMeta],
) -> Result<FixationSet> {
    let videos: BTreeMap<String, VideoMeta> =
        manifest.iter().map(|v| (v.video_id.clone(), v.clone())).collect();
    let mut records = Vec::new();
    match format {
        LogFormat::Jsonl => {
            for (i, line) in reader.lines().enumerate() {
                let line_no = i + 1;
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let raw: RawRecord =
                    serde_json::from_str(&line).map_err(|_| Error::MalformedLine(line_no))?;
                records.push(validate(raw, line_no, &videos)?);
            }
        }
        LogFormat::Csv => {
            let mut rdr = csv::Reader::from_reader(reader);
            for (i, row) in rdr.deserialize::<RawRecord>().enumerate() {
                let line_no = i + 2; // header is line 1
                let raw = row.map_err(|_| Error::MalformedLine(line_no))?;
                records.push(validate(raw, line_no, &videos)?);
            }
        }
    }
    Ok(FixationSet::new(records, manifest.to_vec()))
}

/// A non-negative scalar grid over one frame, row-major.
///
/// `empty` marks grids produced from zero fixations (uniform fallback).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameGrid {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
    #[serde(default)]
    pub empty: bool,
}

impl FrameGrid {
    pub fn zeros(width: usize, height: usize) -> Self {
        FrameGrid { width, height, values: vec![0.0; width * height], empty: false }
    }

    /// Uniform probability grid.
    pub fn uniform(width: usize, height: usize) -> Self {
        let n = width * height;
        FrameGrid { width, height, values: vec![1.0 / n as f64; n], empty: false }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    #[inline]
    pub fn at_mut(&mut self, x: usize, y: usize) -> &mut f64 {
        &mut self.values[y * self.width + x]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Scales values so the grid sums to 1. No-op on an all-zero grid.
    pub fn normalize(&mut self) {
        let s = self.sum();
        if s > 0.0 {
            for v in &mut self.values {
                *v /= s;
            }
        }
    }
}

/// Truncated, unit-sum 2D Gaussian kernel with square support of radius
/// `ceil(4 sigma)`.
fn gaussian_kernel(sigma: f64) -> (i64, Vec<f64>) {
    let r = (4.0 * sigma).ceil() as i64;
    let side = (2 * r + 1) as usize;
    let mut k = vec![0.0; side * side];
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut total = 0.0;
    for dy in -r..=r {
        for dx in -r..=r {
            let v = (-((dx * dx + dy * dy) as f64) * inv).exp();
            k[((dy + r) as usize) * side + (dx + r) as usize] = v;
            total += v;
        }
    }
    for v in &mut k {
        *v /= total;
    }
    (r, k)
}

/// Rasterizes fixation points as unit impulses, blurs with a truncated
/// Gaussian and normalizes the grid to a probability distribution.
///
/// An empty point list yields the uniform grid with the `empty` flag set.
pub fn empirical_frame_map(
    points: &[(f64, f64)],
    grid: (usize, usize),
    sigma: f64,
) -> Result<FrameGrid> {
    let (width, height) = grid;
    if width == 0 || height == 0 {
        return Err(Error::EmptyGrid);
    }
    if points.is_empty() {
        let mut g = FrameGrid::uniform(width, height);
        g.empty = true;
        return Ok(g);
    }
    let (r, kernel) = gaussian_kernel(sigma);
    let side = (2 * r + 1) as usize;
    let mut g = FrameGrid::zeros(width, height);
    for &(px, py) in points {
        let cx = px.round() as i64;
        let cy = py.round() as i64;
        for dy in -r..=r {
            let y = cy + dy;
            if y < 0 || y >= height as i64 {
                continue;
            }
            for dx in -r..=r {
                let x = cx + dx;
                if x < 0 || x >= width as i64 {
                    continue;
                }
                g.values[y as usize * width + x as usize] +=
                    kernel[((dy + r) as usize) * side + (dx + r) as usize];
            }
        }
    }
    if g.sum() <= 0.0 {
        // every kernel fell outside the grid: no usable evidence, same
        // as an empty point list
        g = FrameGrid::uniform(width, height);
        g.empty = true;
        return Ok(g);
    }
    g.normalize();
    Ok(g)
}
