//! Dense optical flow between successive frames.
//!
//! A built-in Horn-Schunck estimator covers the common case; externally
//! computed flow ingests through the "FLOW" binary container.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::volume::Volume;

/// Flow between one frame pair: horizontal and vertical components in
/// px/frame, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub width: usize,
    pub height: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FlowField {
    pub fn zeros(width: usize, height: usize) -> Self {
        FlowField { width, height, u: vec![0.0; width * height], v: vec![0.0; width * height] }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.u[i], self.v[i])
    }

    #[inline]
    pub fn at_clamped(&self, x: i64, y: i64) -> (f64, f64) {
        let x = x.clamp(0, self.width as i64 - 1) as usize;
        let y = y.clamp(0, self.height as i64 - 1) as usize;
        self.at(x, y)
    }
}

fn central_diff_x(plane: &[f32], w: usize, _h: usize, x: usize, y: usize) -> f64 {
    let xm = x.saturating_sub(1);
    let xp = (x + 1).min(w - 1);
    0.5 * (plane[y * w + xp] as f64 - plane[y * w + xm] as f64)
}

fn central_diff_y(plane: &[f32], w: usize, h: usize, x: usize, y: usize) -> f64 {
    let ym = y.saturating_sub(1);
    let yp = (y + 1).min(h - 1);
    0.5 * (plane[yp * w + x] as f64 - plane[ym * w + x] as f64)
}

/// 4-neighbour average used by the fixed-point iteration.
fn neighbor_avg(field: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let xm = x.saturating_sub(1);
            let xp = (x + 1).min(w - 1);
            let ym = y.saturating_sub(1);
            let yp = (y + 1).min(h - 1);
            out[y * w + x] =
                0.25 * (field[y * w + xm] + field[y * w + xp] + field[ym * w + x] + field[yp * w + x]);
        }
    }
    out
}

/// Classical Horn-Schunck variational flow via fixed-point iteration.
/// `lambda` is the smoothness weight; larger values give smoother fields.
/// Returns one field per successive frame pair.
pub fn horn_schunck_flow(volume: &Volume, lambda: f64, iterations: usize) -> Result<Vec<FlowField>> {
    let t = volume.frame_count();
    if t < 2 {
        return Err(Error::SingleFrame);
    }
    let (w, h) = (volume.width, volume.height);
    let mut out = Vec::with_capacity(t - 1);
    for f in 0..t - 1 {
        let a = &volume.frames[f];
        let b = &volume.frames[f + 1];
        let mut ix = vec![0.0; w * h];
        let mut iy = vec![0.0; w * h];
        let mut it = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                ix[i] = 0.5 * (central_diff_x(a, w, h, x, y) + central_diff_x(b, w, h, x, y));
                iy[i] = 0.5 * (central_diff_y(a, w, h, x, y) + central_diff_y(b, w, h, x, y));
                it[i] = b[i] as f64 - a[i] as f64;
            }
        }
        let mut u = vec![0.0; w * h];
        let mut v = vec![0.0; w * h];
        for _ in 0..iterations {
            let ubar = neighbor_avg(&u, w, h);
            let vbar = neighbor_avg(&v, w, h);
            for i in 0..w * h {
                let denom = lambda + ix[i] * ix[i] + iy[i] * iy[i];
                let common = (ix[i] * ubar[i] + iy[i] * vbar[i] + it[i]) / denom;
                u[i] = ubar[i] - ix[i] * common;
                v[i] = vbar[i] - iy[i] * common;
            }
        }
        out.push(FlowField { width: w, height: h, u, v });
    }
    Ok(out)
}

const FLOW_MAGIC: &[u8; 4] = b"FLOW";

/// Writes the FLOW container: magic, u16 version, u32 width, height,
/// field count, then per field the u plane and the v plane as f32 LE.
pub fn write_flow<W: Write>(w: &mut W, fields: &[FlowField]) -> Result<()> {
    let (fw, fh) = fields
        .first()
        .map(|f| (f.width, f.height))
        .ok_or_else(|| Error::Format("no flow fields".into()))?;
    w.write_all(FLOW_MAGIC)?;
    w.write_all(&1u16.to_le_bytes())?;
    w.write_all(&(fw as u32).to_le_bytes())?;
    w.write_all(&(fh as u32).to_le_bytes())?;
    w.write_all(&(fields.len() as u32).to_le_bytes())?;
    for f in fields {
        for &x in f.u.iter().chain(f.v.iter()) {
            w.write_all(&(x as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_flow<R: Read>(r: &mut R) -> Result<Vec<FlowField>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FLOW_MAGIC {
        return Err(Error::Format("bad FLOW magic".into()));
    }
    let mut b2 = [0u8; 2];
    r.read_exact(&mut b2)?;
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let width = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let height = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let count = u32::from_le_bytes(b4) as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut f = FlowField::zeros(width, height);
        for x in f.u.iter_mut().chain(f.v.iter_mut()) {
            r.read_exact(&mut b4)?;
            *x = f32::from_le_bytes(b4) as f64;
        }
        out.push(f);
    }
    Ok(out)
}
