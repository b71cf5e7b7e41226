//! Automatic area-of-interest discovery and scanpath encoding.
//!
//! Per frame, fixations are clustered with k-means, increasing k until the
//! mean squared error per fixation drops below a threshold. Centroids of
//! successive frames are linked into tracks (tolerating short temporal
//! gaps); each maximal chain becomes an AOI. Subject scanpaths are then
//! encoded as strings of AOI indices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixation::FixationSet;
use crate::volume::Volume;

/// A spatio-temporal AOI track: one centroid per frame in [birth, death].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AoiTrack {
    pub aoi_id: usize,
    pub birth: u32,
    pub death: u32,
    /// Centroid per frame, index 0 corresponds to `birth`.
    pub centroids: Vec<(f64, f64)>,
}

impl AoiTrack {
    pub fn alive(&self, frame: u32) -> bool {
        self.birth <= frame && frame <= self.death
    }

    pub fn centroid_at(&self, frame: u32) -> Option<(f64, f64)> {
        if !self.alive(frame) {
            return None;
        }
        Some(self.centroids[(frame - self.birth) as usize])
    }

    /// Temporal distance from `frame` to the track's lifespan (0 if alive).
    pub fn temporal_gap(&self, frame: u32) -> u32 {
        if frame < self.birth {
            self.birth - frame
        } else if frame > self.death {
            frame - self.death
        } else {
            0
        }
    }
}

/// A subject's scanpath as a time-ordered sequence of AOI indices (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AoiString {
    pub subject: String,
    pub symbols: Vec<usize>,
}

/// Tuning knobs for AOI discovery; defaults derive from the fovea radius.
#[derive(Debug, Clone)]
pub struct AoiParams {
    /// Accepted mean squared error per fixation (px^2).
    pub sse_threshold: f64,
    /// Max distance between successive centroids of one track (px).
    pub link_radius: f64,
    /// Max missing frames bridged inside a track.
    pub max_gap: u32,
    pub seed: u64,
}

impl AoiParams {
    pub fn from_fovea(fovea_px: f64, seed: u64) -> Self {
        AoiParams {
            sse_threshold: fovea_px * fovea_px,
            link_radius: fovea_px,
            max_gap: 5,
            seed,
        }
    }
}

fn sq_dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    dx * dx + dy * dy
}

/// k-means over 2D points with k-means++ seeding; returns (centroids, sse).
fn kmeans_2d(points: &[(f64, f64)], k: usize, rng: &mut ChaCha20Rng) -> (Vec<(f64, f64)>, f64) {
    let n = points.len();
    debug_assert!(k >= 1 && k <= n);
    // k-means++ seeding
    let mut centers = Vec::with_capacity(k);
    centers.push(points[rng.gen_range(0..n)]);
    let mut d2: Vec<f64> = points.iter().map(|&p| sq_dist(p, centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            points[rng.gen_range(0..n)]
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
            points[pick]
        };
        centers.push(next);
        for (i, &p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, next));
        }
    }
    // Lloyd iterations until assignment fixpoint
    let mut assign = vec![0usize; n];
    loop {
        let mut changed = false;
        for (i, &p) in points.iter().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| sq_dist(p, centers[a]).partial_cmp(&sq_dist(p, centers[b])).unwrap())
                .unwrap();
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for (i, &p) in points.iter().enumerate() {
            let s = &mut sums[assign[i]];
            s.0 += p.0;
            s.1 += p.1;
            s.2 += 1;
        }
        for (c, s) in centers.iter_mut().zip(sums.iter()) {
            if s.2 > 0 {
                *c = (s.0 / s.2 as f64, s.1 / s.2 as f64);
            }
        }
        if !changed {
            break;
        }
    }
    let sse: f64 = points.iter().enumerate().map(|(i, &p)| sq_dist(p, centers[assign[i]])).sum();
    (centers, sse)
}

/// Smallest-k clustering of one frame's fixation points: k grows until the
/// mean SSE per point is at or below the threshold. 10 restarts per k.
fn adaptive_cluster(
    points: &[(f64, f64)],
    sse_threshold: f64,
    rng: &mut ChaCha20Rng,
) -> Vec<(f64, f64)> {
    let n = points.len();
    for k in 1..=n {
        let mut best: Option<(Vec<(f64, f64)>, f64)> = None;
        for _ in 0..10 {
            let (c, sse) = kmeans_2d(points, k, rng);
            if best.as_ref().map(|b| sse < b.1).unwrap_or(true) {
                best = Some((c, sse));
            }
        }
        let (centers, sse) = best.unwrap();
        if sse / n as f64 <= sse_threshold {
            return centers;
        }
    }
    unreachable!("k = n always reaches zero SSE")
}

struct OpenTrack {
    entries: Vec<(u32, f64, f64)>,
}

/// Discovers AOI tracks for one video by adaptive per-frame clustering and
/// centroid linking across frames.
pub fn discover_aois(
    fixations: &FixationSet,
    video_id: &str,
    params: &AoiParams,
) -> Result<Vec<AoiTrack>> {
    let meta = fixations
        .videos
        .get(video_id)
        .ok_or_else(|| Error::UnknownVideo(video_id.to_string()))?;
    if fixations.for_video(video_id).next().is_none() {
        return Err(Error::NoFixations);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let mut open: Vec<OpenTrack> = Vec::new();
    let mut closed: Vec<OpenTrack> = Vec::new();

    for frame in 0..meta.frame_count {
        let points: Vec<(f64, f64)> =
            fixations.at_frame(video_id, frame).map(|r| (r.x, r.y)).collect();
        if points.is_empty() {
            continue;
        }
        let mut centers = adaptive_cluster(&points, params.sse_threshold, &mut rng);
        centers.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());

        // close stale tracks first
        let mut still_open = Vec::new();
        for t in open.drain(..) {
            let last = t.entries.last().unwrap().0;
            if frame > last && frame - last - 1 > params.max_gap {
                closed.push(t);
            } else {
                still_open.push(t);
            }
        }
        open = still_open;

        // greedy one-to-one matching by increasing distance
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (ci, &c) in centers.iter().enumerate() {
            for (ti, t) in open.iter().enumerate() {
                let (_, lx, ly) = *t.entries.last().unwrap();
                let d = sq_dist(c, (lx, ly)).sqrt();
                if d <= params.link_radius {
                    pairs.push((d, ci, ti));
                }
            }
        }
        pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut used_c = vec![false; centers.len()];
        let mut used_t = vec![false; open.len()];
        for (_, ci, ti) in pairs {
            if used_c[ci] || used_t[ti] {
                continue;
            }
            used_c[ci] = true;
            used_t[ti] = true;
            open[ti].entries.push((frame, centers[ci].0, centers[ci].1));
        }
        for (ci, &c) in centers.iter().enumerate() {
            if !used_c[ci] {
                open.push(OpenTrack { entries: vec![(frame, c.0, c.1)] });
            }
        }
    }
    closed.append(&mut open);

    // interpolate gaps and finalize
    let mut tracks: Vec<AoiTrack> = closed
        .into_iter()
        .map(|t| {
            let birth = t.entries.first().unwrap().0;
            let death = t.entries.last().unwrap().0;
            let mut centroids = Vec::with_capacity((death - birth + 1) as usize);
            let mut it = t.entries.iter().peekable();
            let mut prev = *it.next().unwrap();
            centroids.push((prev.1, prev.2));
            for &next in it {
                let span = (next.0 - prev.0) as f64;
                for f in (prev.0 + 1)..next.0 {
                    let a = (f - prev.0) as f64 / span;
                    centroids.push((prev.1 + a * (next.1 - prev.1), prev.2 + a * (next.2 - prev.2)));
                }
                centroids.push((next.1, next.2));
                prev = next;
            }
            AoiTrack { aoi_id: 0, birth, death, centroids }
        })
        .collect();
    tracks.sort_by(|a, b| {
        (a.birth, a.centroids[0].0, a.centroids[0].1)
            .partial_cmp(&(b.birth, b.centroids[0].0, b.centroids[0].1))
            .unwrap()
    });
    for (i, t) in tracks.iter_mut().enumerate() {
        t.aoi_id = i + 1;
    }
    Ok(tracks)
}

/// Encodes each subject's fixations on one video as a string of AOI ids.
///
/// Each fixation maps to the nearest track alive at its start frame; ties go
/// to the lower id; fixations with no live track map to the temporally
/// nearest track.
pub fn assign_scanpaths(
    fixations: &FixationSet,
    video_id: &str,
    tracks: &[AoiTrack],
) -> Vec<AoiString> {
    assert!(!tracks.is_empty(), "tracks must be non-empty");
    let mut out: Vec<AoiString> = Vec::new();
    for subject in fixations.subjects() {
        let mut symbols = Vec::new();
        let mut recs: Vec<_> =
            fixations.for_video(video_id).filter(|r| r.subject == subject).collect();
        recs.sort_by_key(|r| r.start_frame);
        for r in &recs {
            let frame = r.start_frame;
            let alive: Vec<&AoiTrack> = tracks.iter().filter(|t| t.alive(frame)).collect();
            let id = if alive.is_empty() {
                tracks
                    .iter()
                    .min_by_key(|t| (t.temporal_gap(frame), t.aoi_id))
                    .unwrap()
                    .aoi_id
            } else {
                alive
                    .iter()
                    .min_by(|a, b| {
                        let da = sq_dist((r.x, r.y), a.centroid_at(frame).unwrap());
                        let db = sq_dist((r.x, r.y), b.centroid_at(frame).unwrap());
                        da.partial_cmp(&db).unwrap().then(a.aoi_id.cmp(&b.aoi_id))
                    })
                    .unwrap()
                    .aoi_id
            };
            symbols.push(id);
        }
        if !symbols.is_empty() {
            out.push(AoiString { subject, symbols });
        }
    }
    out
}

fn patch(vol: &Volume, cx: f64, cy: f64, t: u32, radius: i64) -> Vec<f64> {
    let (cx, cy) = (cx.round() as i64, cy.round() as i64);
    let mut p = Vec::with_capacity(((2 * radius + 1) * (2 * radius + 1)) as usize);
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            p.push(vol.at_clamped(cx + dx, cy + dy, t as i64) as f64);
        }
    }
    p
}

/// Normalized cross-correlation between two equal-size patches. Two flat
/// patches correlate perfectly; a flat patch against a textured one scores 0.
fn ncc(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let mut num = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b.iter()) {
        num += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    let eps = 1e-12;
    if va < eps && vb < eps {
        1.0
    } else if va < eps || vb < eps {
        0.0
    } else {
        num / (va.sqrt() * vb.sqrt())
    }
}

/// Extends every track forwards and backwards in time while the image patch
/// at the (frozen) endpoint centroid still resembles the endpoint frame.
pub fn extend_aois(
    tracks: &[AoiTrack],
    volume: &Volume,
    patch_radius: i64,
    change_threshold: f64,
) -> Vec<AoiTrack> {
    let frame_count = volume.frame_count() as u32;
    tracks
        .iter()
        .map(|t| {
            let mut out = t.clone();
            // backwards from birth
            let (bx, by) = t.centroids[0];
            let ref_patch = patch(volume, bx, by, t.birth, patch_radius);
            let mut f = t.birth;
            while f > 0 {
                let cand = patch(volume, bx, by, f - 1, patch_radius);
                if ncc(&ref_patch, &cand) < change_threshold {
                    break;
                }
                f -= 1;
                out.centroids.insert(0, (bx, by));
            }
            out.birth = f;
            // forwards from death
            let (dx, dy) = *t.centroids.last().unwrap();
            let ref_patch = patch(volume, dx, dy, t.death, patch_radius);
            let mut f = t.death;
            while f + 1 < frame_count {
                let cand = patch(volume, dx, dy, f + 1, patch_radius);
                if ncc(&ref_patch, &cand) < change_threshold {
                    break;
                }
                f += 1;
                out.centroids.push((dx, dy));
            }
            out.death = f;
            out
        })
        .collect()
}

/// Random baseline strings: lengths drawn from the empirical subject string
/// lengths, timestamps increasing, symbols uniform among tracks alive then.
pub fn random_aoi_strings(
    tracks: &[AoiTrack],
    count: usize,
    lengths: &[usize],
    rng_seed: u64,
) -> Vec<AoiString> {
    assert!(!tracks.is_empty() && count >= 1);
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    let lo = tracks.iter().map(|t| t.birth).min().unwrap();
    let hi = tracks.iter().map(|t| t.death).max().unwrap();
    let alive_frames: Vec<u32> =
        (lo..=hi).filter(|&f| tracks.iter().any(|t| t.alive(f))).collect();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let len = if lengths.is_empty() { 1 } else { lengths[rng.gen_range(0..lengths.len())] };
        let mut frames: Vec<u32> =
            (0..len).map(|_| alive_frames[rng.gen_range(0..alive_frames.len())]).collect();
        frames.sort_unstable();
        let symbols = frames
            .iter()
            .map(|&f| {
                let alive: Vec<usize> =
                    tracks.iter().filter(|t| t.alive(f)).map(|t| t.aoi_id).collect();
                alive[rng.gen_range(0..alive.len())]
            })
            .collect();
        out.push(AoiString { subject: format!("rand{i}"), symbols });
    }
    out
}
