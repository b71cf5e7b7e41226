//! Sliding-window fixation detector: a linear model over lifted HoG+MBH
//! descriptors whose window scores, swept across a video, form a
//! per-frame saliency map.

use crate::error::{Error, Result};
use crate::features::{hog3d, mbh, DETECTOR_GRIDS};
use crate::fixation::FrameGrid;
use crate::flow::FlowField;
use crate::learn::kernel::chi2_feature_map;
use crate::learn::svm::LinearModel;
use crate::saliency::{InterestPoint, Normalization, SaliencyMap};
use crate::volume::Volume;

/// Approximation order of the additive-kernel feature map.
const MAP_ORDER: usize = 3;
/// Sample period of the feature map.
const MAP_PERIOD: f64 = 0.5;

/// One placement of the detector window.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorWindow {
    pub x: f64,
    pub y: f64,
    pub t: u32,
    pub sigma_s: f64,
    pub sigma_t: f64,
}

impl DetectorWindow {
    pub fn interest_point(&self) -> InterestPoint {
        InterestPoint {
            x: self.x,
            y: self.y,
            t: self.t,
            sigma_s: self.sigma_s,
            sigma_t: self.sigma_t,
        }
    }
}

/// Raw (pre-lift) descriptor length: HoG plus the u/v halves of MBH over
/// every detector grid.
fn raw_dim() -> usize {
    DETECTOR_GRIDS.iter().map(|g| 3 * g.cell_count() * g.bins).sum()
}

/// Dimension of the lifted detector descriptor.
pub fn detector_dim() -> usize {
    raw_dim() * (2 * MAP_ORDER + 1)
}

/// The detector's input vector at one window: HoG and MBH over the three
/// detector grids, concatenated, L1-normalized, and lifted through the
/// additive-kernel feature map so a linear model approximates a chi-square
/// kernel machine.
pub fn detector_descriptor(
    volume: &Volume,
    flows: &[FlowField],
    window: &DetectorWindow,
) -> Result<Vec<f64>> {
    let p = window.interest_point();
    let mut raw = Vec::with_capacity(raw_dim());
    for cfg in &DETECTOR_GRIDS {
        raw.extend(hog3d(volume, &p, cfg)?.values);
    }
    for cfg in &DETECTOR_GRIDS {
        raw.extend(mbh(flows, &p, cfg)?.values);
    }
    let l1: f64 = raw.iter().sum();
    if l1 > 0.0 {
        for v in &mut raw {
            *v /= l1;
        }
    }
    chi2_feature_map(&raw, MAP_ORDER, MAP_PERIOD)
}

/// Bilinear upsampling of a coarse score plane to full resolution. Coarse
/// sample i sits at full-resolution coordinate i * stride.
fn upsample_plane(
    coarse: &[f64],
    cw: usize,
    ch: usize,
    stride: (usize, usize),
    width: usize,
    height: usize,
) -> Vec<f64> {
    let (sx, sy) = stride;
    let mut out = vec![0.0f64; width * height];
    for y in 0..height {
        let gy = (y as f64 / sy as f64).min(ch as f64 - 1.0);
        let y0 = gy.floor() as usize;
        let y1 = (y0 + 1).min(ch - 1);
        let fy = gy - y0 as f64;
        for x in 0..width {
            let gx = (x as f64 / sx as f64).min(cw as f64 - 1.0);
            let x0 = gx.floor() as usize;
            let x1 = (x0 + 1).min(cw - 1);
            let fx = gx - x0 as f64;
            let top = coarse[y0 * cw + x0] * (1.0 - fx) + coarse[y0 * cw + x1] * fx;
            let bot = coarse[y1 * cw + x0] * (1.0 - fx) + coarse[y1 * cw + x1] * fx;
            out[y * width + x] = top * (1.0 - fy) + bot * fy;
        }
    }
    out
}

/// Sweeps the model across the video on a stride grid and turns the raw
/// window scores into a per-frame-normalized saliency map.
///
/// Scores are computed at stride resolution, bilinearly upsampled in
/// space, linearly interpolated in time, shifted to non-negative by the
/// per-frame minimum, and normalized so every frame sums to 1.
pub fn detector_apply(
    model: &LinearModel,
    volume: &Volume,
    flows: &[FlowField],
    stride: (usize, usize, usize),
    scales: (f64, f64),
) -> Result<SaliencyMap> {
    if model.w.len() != detector_dim() {
        return Err(Error::DimensionMismatch(format!(
            "model dimension {} does not match detector descriptor {}",
            model.w.len(),
            detector_dim()
        )));
    }
    let (sx, sy, st) = stride;
    assert!(sx > 0 && sy > 0 && st > 0);
    let (w, h, t) = (volume.width, volume.height, volume.frame_count());
    let cw = (w + sx - 1) / sx;
    let ch = (h + sy - 1) / sy;
    let ct = (t + st - 1) / st;

    // coarse score stack
    let mut coarse = vec![vec![0.0f64; cw * ch]; ct];
    for (ti, plane) in coarse.iter_mut().enumerate() {
        let frame = (ti * st).min(t - 1);
        for cy in 0..ch {
            for cx in 0..cw {
                let win = DetectorWindow {
                    x: ((cx * sx).min(w - 1)) as f64,
                    y: ((cy * sy).min(h - 1)) as f64,
                    t: frame as u32,
                    sigma_s: scales.0,
                    sigma_t: scales.1,
                };
                let desc = detector_descriptor(volume, flows, &win)?;
                plane[cy * cw + cx] = model.score(&desc);
            }
        }
    }

    let mut frames = Vec::with_capacity(t);
    for frame in 0..t {
        // linear interpolation between the two surrounding coarse frames
        let gt = (frame as f64 / st as f64).min(ct as f64 - 1.0);
        let t0 = gt.floor() as usize;
        let t1 = (t0 + 1).min(ct - 1);
        let ft = gt - t0 as f64;
        let lo = upsample_plane(&coarse[t0], cw, ch, (sx, sy), w, h);
        let hi = upsample_plane(&coarse[t1], cw, ch, (sx, sy), w, h);
        let mut grid = FrameGrid::zeros(w, h);
        for (g, (a, b)) in grid.values.iter_mut().zip(lo.iter().zip(hi.iter())) {
            *g = a * (1.0 - ft) + b * ft;
        }
        let min = grid.values.iter().cloned().fold(f64::INFINITY, f64::min);
        for v in &mut grid.values {
            *v -= min;
        }
        if grid.sum() <= 0.0 {
            grid = FrameGrid::uniform(w, h);
        } else {
            grid.normalize();
        }
        frames.push(grid);
    }
    Ok(SaliencyMap {
        video_id: String::new(),
        frames,
        normalization: Normalization::PerFrame,
    })
}
