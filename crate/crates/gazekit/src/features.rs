//! Spatio-temporal HoG and MBH descriptors with L2-Hys block
//! normalization, and the motion feature maps (flow magnitude, flow
//! bimodality, 3D Harris cornerness).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixation::FrameGrid;
use crate::flow::FlowField;
use crate::saliency::InterestPoint;
use crate::volume::Volume;

/// Cell layout and orientation binning of one descriptor variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub bins: usize,
}

impl GridConfig {
    pub const fn new(nx: usize, ny: usize, nt: usize) -> Self {
        GridConfig { nx, ny, nt, bins: 9 }
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny * self.nt
    }
}

/// The 7 grid configurations used by the recognition pipeline.
pub const RECOGNITION_GRIDS: [GridConfig; 7] = [
    GridConfig::new(1, 1, 1),
    GridConfig::new(2, 2, 1),
    GridConfig::new(3, 3, 1),
    GridConfig::new(2, 2, 2),
    GridConfig::new(3, 3, 2),
    GridConfig::new(1, 1, 3),
    GridConfig::new(2, 2, 3),
];

/// The 3 grid configurations of the sliding-window fixation detector.
pub const DETECTOR_GRIDS: [GridConfig; 3] =
    [GridConfig::new(1, 1, 1), GridConfig::new(2, 2, 1), GridConfig::new(3, 3, 1)];

/// L2-Hys clipping threshold.
pub const L2_HYS_CLIP: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    Hog,
    Mbh,
}

/// A pooled orientation-histogram descriptor. Length is
/// `cells * bins` for HoG and `2 * cells * bins` for MBH (u and v parts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptor {
    pub values: Vec<f64>,
    pub channel: Channel,
}

/// L2 normalize each `bins`-sized block, clip at 0.7 and renormalize.
fn l2_hys(values: &mut [f64], bins: usize) {
    for block in values.chunks_mut(bins) {
        let norm = block.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 0.0 {
            continue;
        }
        for v in block.iter_mut() {
            *v = (*v / norm).min(L2_HYS_CLIP);
        }
        let norm2 = block.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm2 > 0.0 {
            for v in block.iter_mut() {
                *v /= norm2;
            }
        }
    }
}

struct Window {
    x0: i64,
    x1: i64,
    y0: i64,
    y1: i64,
    t0: i64,
    t1: i64,
}

/// Support window of 6 sigma per axis around the interest point, clamped to
/// the volume.
fn support_window(vol_dims: (usize, usize, usize), p: &InterestPoint) -> Result<Window> {
    if p.sigma_s <= 0.0 || p.sigma_t <= 0.0 {
        return Err(Error::DegenerateWindow);
    }
    let (w, h, t) = vol_dims;
    let hx = (3.0 * p.sigma_s).round() as i64;
    let ht = (3.0 * p.sigma_t).round() as i64;
    let win = Window {
        x0: (p.x.round() as i64 - hx).max(0),
        x1: (p.x.round() as i64 + hx).min(w as i64 - 1),
        y0: (p.y.round() as i64 - hx).max(0),
        y1: (p.y.round() as i64 + hx).min(h as i64 - 1),
        t0: (p.t as i64 - ht).max(0),
        t1: (p.t as i64 + ht).min(t as i64 - 1),
    };
    if win.x1 < win.x0 || win.y1 < win.y0 || win.t1 < win.t0 {
        return Err(Error::DegenerateWindow);
    }
    Ok(win)
}

/// Splits a continuous coordinate onto two adjacent cells with linear
/// weights, clamping outside the cell-center range.
fn cell_weights(pos: f64, extent: f64, cells: usize) -> [(usize, f64); 2] {
    if cells == 1 {
        return [(0, 1.0), (0, 0.0)];
    }
    let c = pos / extent * cells as f64 - 0.5;
    let lo = c.floor();
    let f = c - lo;
    let i0 = lo as i64;
    let i1 = i0 + 1;
    let clamp = |i: i64| i.clamp(0, cells as i64 - 1) as usize;
    [(clamp(i0), 1.0 - f), (clamp(i1), f)]
}

/// Accumulates one gradient vote: orientation bins interpolated linearly
/// (unsigned, wrapping at pi), cells bilinear in space and linear in time.
#[allow(clippy::too_many_arguments)]
fn vote(
    acc: &mut [f64],
    cfg: &GridConfig,
    win: &Window,
    x: i64,
    y: i64,
    t: i64,
    gx: f64,
    gy: f64,
    cell_offset: usize,
) {
    let mag = (gx * gx + gy * gy).sqrt();
    if mag <= 0.0 {
        return;
    }
    let mut theta = gy.atan2(gx);
    if theta < 0.0 {
        theta += std::f64::consts::PI;
    }
    if theta >= std::f64::consts::PI {
        theta -= std::f64::consts::PI;
    }
    let b = theta / std::f64::consts::PI * cfg.bins as f64;
    let b0 = b.floor() as usize % cfg.bins;
    let bf = b - b.floor();
    let b1 = (b0 + 1) % cfg.bins;

    let wx = cell_weights((x - win.x0) as f64 + 0.5, (win.x1 - win.x0 + 1) as f64, cfg.nx);
    let wy = cell_weights((y - win.y0) as f64 + 0.5, (win.y1 - win.y0 + 1) as f64, cfg.ny);
    let wt = cell_weights((t - win.t0) as f64 + 0.5, (win.t1 - win.t0 + 1) as f64, cfg.nt);
    for &(cx, fx) in &wx {
        for &(cy, fy) in &wy {
            for &(ct, ft) in &wt {
                let wgt = fx * fy * ft * mag;
                if wgt <= 0.0 {
                    continue;
                }
                let cell = cell_offset + (ct * cfg.ny + cy) * cfg.nx + cx;
                acc[cell * cfg.bins + b0] += wgt * (1.0 - bf);
                acc[cell * cfg.bins + b1] += wgt * bf;
            }
        }
    }
}

/// Space-time HoG: per-frame spatial gradients of intensity binned into
/// unsigned orientations, pooled over the cell grid, L2-Hys per cell.
pub fn hog3d(volume: &Volume, p: &InterestPoint, cfg: &GridConfig) -> Result<Descriptor> {
    let win = support_window((volume.width, volume.height, volume.frame_count()), p)?;
    let mut acc = vec![0.0f64; cfg.cell_count() * cfg.bins];
    for t in win.t0..=win.t1 {
        for y in win.y0..=win.y1 {
            for x in win.x0..=win.x1 {
                let gx = 0.5
                    * (volume.at_clamped(x + 1, y, t) as f64
                        - volume.at_clamped(x - 1, y, t) as f64);
                let gy = 0.5
                    * (volume.at_clamped(x, y + 1, t) as f64
                        - volume.at_clamped(x, y - 1, t) as f64);
                vote(&mut acc, cfg, &win, x, y, t, gx, gy, 0);
            }
        }
    }
    l2_hys(&mut acc, cfg.bins);
    Ok(Descriptor { values: acc, channel: Channel::Hog })
}

fn flow_at<'a>(flows: &'a [FlowField], t: i64) -> &'a FlowField {
    let idx = t.clamp(0, flows.len() as i64 - 1) as usize;
    &flows[idx]
}

/// Motion boundary histogram: HoG-style binning of the spatial gradients of
/// the u and v flow components, concatenated. Constant flow (camera motion)
/// yields a zero descriptor.
pub fn mbh(flows: &[FlowField], p: &InterestPoint, cfg: &GridConfig) -> Result<Descriptor> {
    if flows.is_empty() {
        return Err(Error::DegenerateWindow);
    }
    let (w, h) = (flows[0].width, flows[0].height);
    let win = support_window((w, h, flows.len()), p)?;
    let half = cfg.cell_count() * cfg.bins;
    let mut acc = vec![0.0f64; 2 * half];
    for t in win.t0..=win.t1 {
        let field = flow_at(flows, t);
        for y in win.y0..=win.y1 {
            for x in win.x0..=win.x1 {
                let (u_xp, _) = field.at_clamped(x + 1, y);
                let (u_xm, _) = field.at_clamped(x - 1, y);
                let (u_yp, _) = field.at_clamped(x, y + 1);
                let (u_ym, _) = field.at_clamped(x, y - 1);
                vote(&mut acc[..half], cfg, &win, x, y, t, 0.5 * (u_xp - u_xm), 0.5 * (u_yp - u_ym), 0);
                let (_, v_xp) = field.at_clamped(x + 1, y);
                let (_, v_xm) = field.at_clamped(x - 1, y);
                let (_, v_yp) = field.at_clamped(x, y + 1);
                let (_, v_ym) = field.at_clamped(x, y - 1);
                vote(&mut acc[half..], cfg, &win, x, y, t, 0.5 * (v_xp - v_xm), 0.5 * (v_yp - v_ym), 0);
            }
        }
    }
    l2_hys(&mut acc, cfg.bins);
    Ok(Descriptor { values: acc, channel: Channel::Mbh })
}

/// Motion feature map variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionMapKind {
    FlowMagnitude,
    FlowBimodality,
    Harris3d,
}

#[derive(Debug, Clone)]
pub struct MotionMapParams {
    /// Neighborhood radius (px) for the bimodality mode analysis.
    pub bimodality_radius: usize,
    /// Harris detector constant.
    pub harris_k: f64,
    /// Differentiation scale; integration scale is twice this.
    pub harris_sigma: f64,
}

impl Default for MotionMapParams {
    fn default() -> Self {
        MotionMapParams { bimodality_radius: 4, harris_k: 0.005, harris_sigma: 1.5 }
    }
}

/// Computes one non-negative response map per frame.
pub fn motion_feature_map(
    kind: MotionMapKind,
    volume: &Volume,
    flows: &[FlowField],
    params: &MotionMapParams,
) -> Result<Vec<FrameGrid>> {
    match kind {
        MotionMapKind::FlowMagnitude => Ok(flow_magnitude(flows)),
        MotionMapKind::FlowBimodality => Ok(flow_bimodality(flows, params.bimodality_radius)),
        MotionMapKind::Harris3d => harris3d(volume, params.harris_sigma, params.harris_k),
    }
}

fn flow_magnitude(flows: &[FlowField]) -> Vec<FrameGrid> {
    flows
        .iter()
        .map(|f| {
            let mut g = FrameGrid::zeros(f.width, f.height);
            for i in 0..f.u.len() {
                g.values[i] = (f.u[i] * f.u[i] + f.v[i] * f.v[i]).sqrt();
            }
            g
        })
        .collect()
}

/// 2-means on a small set of 2D vectors, seeded from the two most distant
/// vectors. Returns (centers, sse).
fn two_means(vecs: &[(f64, f64)]) -> ([(f64, f64); 2], f64) {
    let n = vecs.len();
    // deterministic seeding: the two most distant vectors
    let (mut si, mut sj, mut best) = (0, 0, -1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (vecs[i].0 - vecs[j].0).powi(2) + (vecs[i].1 - vecs[j].1).powi(2);
            if d > best {
                best = d;
                si = i;
                sj = j;
            }
        }
    }
    let mut c = [vecs[si], vecs[sj]];
    let mut assign = vec![0u8; n];
    for _ in 0..20 {
        let mut changed = false;
        for (i, &(x, y)) in vecs.iter().enumerate() {
            let d0 = (x - c[0].0).powi(2) + (y - c[0].1).powi(2);
            let d1 = (x - c[1].0).powi(2) + (y - c[1].1).powi(2);
            let a = u8::from(d1 < d0);
            if assign[i] != a {
                assign[i] = a;
                changed = true;
            }
        }
        let mut sums = [(0.0, 0.0, 0usize); 2];
        for (i, &(x, y)) in vecs.iter().enumerate() {
            let s = &mut sums[assign[i] as usize];
            s.0 += x;
            s.1 += y;
            s.2 += 1;
        }
        for k in 0..2 {
            if sums[k].2 > 0 {
                c[k] = (sums[k].0 / sums[k].2 as f64, sums[k].1 / sums[k].2 as f64);
            }
        }
        if !changed {
            break;
        }
    }
    let sse: f64 = vecs
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let k = assign[i] as usize;
            (x - c[k].0).powi(2) + (y - c[k].1).powi(2)
        })
        .sum();
    (c, sse)
}

/// Per pixel: distance between the two flow modes of the neighborhood,
/// weighted by exp(s1/s2 - 1). Constant fields respond 0.
fn flow_bimodality(flows: &[FlowField], radius: usize) -> Vec<FrameGrid> {
    let r = radius as i64;
    flows
        .iter()
        .map(|f| {
            let mut g = FrameGrid::zeros(f.width, f.height);
            for y in 0..f.height as i64 {
                for x in 0..f.width as i64 {
                    let mut vecs = Vec::new();
                    for dy in -r..=r {
                        for dx in -r..=r {
                            if dx * dx + dy * dy > r * r {
                                continue;
                            }
                            let (px, py) = (x + dx, y + dy);
                            if px < 0 || py < 0 || px >= f.width as i64 || py >= f.height as i64 {
                                continue;
                            }
                            vecs.push(f.at(px as usize, py as usize));
                        }
                    }
                    if vecs.len() < 2 {
                        continue;
                    }
                    let n = vecs.len() as f64;
                    let mean = vecs
                        .iter()
                        .fold((0.0, 0.0), |a, &(x, y)| (a.0 + x / n, a.1 + y / n));
                    let s1: f64 = vecs
                        .iter()
                        .map(|&(x, y)| (x - mean.0).powi(2) + (y - mean.1).powi(2))
                        .sum();
                    let (c, s2) = two_means(&vecs);
                    let dist =
                        ((c[0].0 - c[1].0).powi(2) + (c[0].1 - c[1].1).powi(2)).sqrt();
                    let ratio = (s1 / s2.max(1e-12)).min(30.0);
                    g.values[(y as usize) * f.width + x as usize] = dist * (ratio - 1.0).exp();
                }
            }
            g
        })
        .collect()
}

/// Spatio-temporal Harris cornerness: det(M) - k trace^3(M) on the smoothed
/// 3D structure tensor, clamped at 0.
fn harris3d(volume: &Volume, sigma_d: f64, k: f64) -> Result<Vec<FrameGrid>> {
    let (w, h) = (volume.width, volume.height);
    let t = volume.frame_count();
    // smooth the volume at the differentiation scale
    let smoothed = gaussian_blur_volume(volume, sigma_d, sigma_d);
    // gradients
    let mut planes: [Vec<Vec<f64>>; 6] = Default::default(); // xx, yy, tt, xy, xt, yt
    for p in &mut planes {
        *p = vec![vec![0.0; w * h]; t];
    }
    for f in 0..t as i64 {
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let gx = 0.5
                    * (smoothed.at_clamped(x + 1, y, f) - smoothed.at_clamped(x - 1, y, f)) as f64;
                let gy = 0.5
                    * (smoothed.at_clamped(x, y + 1, f) - smoothed.at_clamped(x, y - 1, f)) as f64;
                let gt = 0.5
                    * (smoothed.at_clamped(x, y, f + 1) - smoothed.at_clamped(x, y, f - 1)) as f64;
                let i = (y as usize) * w + x as usize;
                planes[0][f as usize][i] = gx * gx;
                planes[1][f as usize][i] = gy * gy;
                planes[2][f as usize][i] = gt * gt;
                planes[3][f as usize][i] = gx * gy;
                planes[4][f as usize][i] = gx * gt;
                planes[5][f as usize][i] = gy * gt;
            }
        }
    }
    // integrate at twice the differentiation scale
    let sigma_i = 2.0 * sigma_d;
    for p in &mut planes {
        blur_planes(p, w, h, sigma_i);
    }
    let mut out = Vec::with_capacity(t);
    for f in 0..t {
        let mut g = FrameGrid::zeros(w, h);
        for i in 0..w * h {
            let (xx, yy, tt) = (planes[0][f][i], planes[1][f][i], planes[2][f][i]);
            let (xy, xt, yt) = (planes[3][f][i], planes[4][f][i], planes[5][f][i]);
            let det = xx * (yy * tt - yt * yt) - xy * (xy * tt - yt * xt)
                + xt * (xy * yt - yy * xt);
            let trace = xx + yy + tt;
            g.values[i] = (det - k * trace * trace * trace).max(0.0);
        }
        out.push(g);
    }
    Ok(out)
}

fn gaussian_kernel_1d(sigma: f64) -> (i64, Vec<f64>) {
    let r = (3.0 * sigma).ceil().max(1.0) as i64;
    let mut kernel = Vec::with_capacity((2 * r + 1) as usize);
    let mut total = 0.0;
    for d in -r..=r {
        let v = (-((d * d) as f64) / (2.0 * sigma * sigma)).exp();
        kernel.push(v);
        total += v;
    }
    for v in &mut kernel {
        *v /= total;
    }
    (r, kernel)
}

/// Separable Gaussian blur of a volume, spatial sigma and temporal sigma.
pub fn gaussian_blur_volume(volume: &Volume, sigma_s: f64, sigma_t: f64) -> Volume {
    let (w, h) = (volume.width, volume.height);
    let t = volume.frame_count();
    let (rs, ks) = gaussian_kernel_1d(sigma_s);
    let (rt, kt) = gaussian_kernel_1d(sigma_t);
    let mut a = volume.clone();
    let mut b = Volume::zeros(w, h, t);
    // x pass
    for f in 0..t {
        for y in 0..h {
            for x in 0..w as i64 {
                let mut acc = 0.0;
                for d in -rs..=rs {
                    acc += ks[(d + rs) as usize] * a.at_clamped(x + d, y as i64, f as i64) as f64;
                }
                b.set(x as usize, y, f, acc as f32);
            }
        }
    }
    std::mem::swap(&mut a, &mut b);
    // y pass
    for f in 0..t {
        for y in 0..h as i64 {
            for x in 0..w {
                let mut acc = 0.0;
                for d in -rs..=rs {
                    acc += ks[(d + rs) as usize] * a.at_clamped(x as i64, y + d, f as i64) as f64;
                }
                b.set(x, y as usize, f, acc as f32);
            }
        }
    }
    std::mem::swap(&mut a, &mut b);
    // t pass
    for f in 0..t as i64 {
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for d in -rt..=rt {
                    acc += kt[(d + rt) as usize] * a.at_clamped(x as i64, y as i64, f + d) as f64;
                }
                b.set(x, y, f as usize, acc as f32);
            }
        }
    }
    b
}

fn blur_planes(planes: &mut Vec<Vec<f64>>, w: usize, h: usize, sigma: f64) {
    let t = planes.len();
    let mut vol = Volume::zeros(w, h, t);
    for f in 0..t {
        for i in 0..w * h {
            vol.frames[f][i] = planes[f][i] as f32;
        }
    }
    let blurred = gaussian_blur_volume(&vol, sigma, sigma);
    for f in 0..t {
        for i in 0..w * h {
            planes[f][i] = blurred.frames[f][i] as f64;
        }
    }
}
