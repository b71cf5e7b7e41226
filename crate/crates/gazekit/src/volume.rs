//! Grayscale video volumes and raster I/O.
//!
//! Videos enter the toolkit as directories of PGM frames or as the raw
//! "VOLV" container; no codec decoding is done.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A grayscale video volume, one row-major `f32` plane per frame.
/// Intensities are nominally in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    pub width: usize,
    pub height: usize,
    pub frames: Vec<Vec<f32>>,
}

impl Volume {
    pub fn zeros(width: usize, height: usize, frame_count: usize) -> Self {
        Volume { width, height, frames: vec![vec![0.0; width * height]; frame_count] }
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, t: usize) -> f32 {
        self.frames[t][y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, t: usize, v: f32) {
        self.frames[t][y * self.width + x] = v;
    }

    /// Clamped read, used by window extraction near borders.
    #[inline]
    pub fn at_clamped(&self, x: i64, y: i64, t: i64) -> f32 {
        let x = x.clamp(0, self.width as i64 - 1) as usize;
        let y = y.clamp(0, self.height as i64 - 1) as usize;
        let t = t.clamp(0, self.frames.len() as i64 - 1) as usize;
        self.at(x, y, t)
    }
}

const VOLV_MAGIC: &[u8; 4] = b"VOLV";

/// Writes a volume as the raw "VOLV" container: magic, u16 version, u32
/// width/height/frames, then little-endian f32 planes, frame-major.
pub fn write_volume<W: Write>(w: &mut W, vol: &Volume) -> Result<()> {
    w.write_all(VOLV_MAGIC)?;
    w.write_all(&1u16.to_le_bytes())?;
    w.write_all(&(vol.width as u32).to_le_bytes())?;
    w.write_all(&(vol.height as u32).to_le_bytes())?;
    w.write_all(&(vol.frames.len() as u32).to_le_bytes())?;
    for frame in &vol.frames {
        for &v in frame {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_volume<R: Read>(r: &mut R) -> Result<Volume> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != VOLV_MAGIC {
        return Err(Error::Format("bad VOLV magic".into()));
    }
    let mut b2 = [0u8; 2];
    r.read_exact(&mut b2)?;
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let width = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let height = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let frame_count = u32::from_le_bytes(b4) as usize;
    let mut frames = Vec::with_capacity(frame_count);
    for _ in 0..frame_count {
        let mut plane = vec![0.0f32; width * height];
        for v in &mut plane {
            r.read_exact(&mut b4)?;
            *v = f32::from_le_bytes(b4);
        }
        frames.push(plane);
    }
    Ok(Volume { width, height, frames })
}

/// Writes one plane as a 16-bit binary PGM, values scaled by the plane max.
pub fn write_pgm16(path: &Path, width: usize, height: usize, values: &[f64]) -> Result<()> {
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    let scale = if max > 0.0 { 65535.0 / max } else { 0.0 };
    let mut buf = format!("P5\n{} {}\n65535\n", width, height).into_bytes();
    for &v in values {
        let q = (v * scale).round().clamp(0.0, 65535.0) as u16;
        buf.extend_from_slice(&q.to_be_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Reads a binary (P5) PGM into an f32 plane scaled to [0, 1].
pub fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<f32>)> {
    let data = fs::read(path)?;
    let mut pos = 0usize;
    let mut fields = Vec::new();
    // header: magic, width, height, maxval; '#' starts a comment
    while fields.len() < 4 {
        while pos < data.len() && (data[pos] as char).is_whitespace() {
            pos += 1;
        }
        if pos < data.len() && data[pos] == b'#' {
            while pos < data.len() && data[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < data.len() && !(data[pos] as char).is_whitespace() {
            pos += 1;
        }
        fields.push(
            std::str::from_utf8(&data[start..pos])
                .map_err(|_| Error::Format("bad PGM header".into()))?
                .to_string(),
        );
    }
    pos += 1; // single whitespace after maxval
    if fields[0] != "P5" {
        return Err(Error::Format("only binary PGM (P5) supported".into()));
    }
    let width: usize = fields[1].parse().map_err(|_| Error::Format("bad PGM width".into()))?;
    let height: usize = fields[2].parse().map_err(|_| Error::Format("bad PGM height".into()))?;
    let maxval: u32 = fields[3].parse().map_err(|_| Error::Format("bad PGM maxval".into()))?;
    let n = width * height;
    let mut plane = vec![0.0f32; n];
    if maxval < 256 {
        if data.len() < pos + n {
            return Err(Error::Format("truncated PGM".into()));
        }
        for i in 0..n {
            plane[i] = data[pos + i] as f32 / maxval as f32;
        }
    } else {
        if data.len() < pos + 2 * n {
            return Err(Error::Format("truncated PGM".into()));
        }
        for i in 0..n {
            let v = u16::from_be_bytes([data[pos + 2 * i], data[pos + 2 * i + 1]]);
            plane[i] = v as f32 / maxval as f32;
        }
    }
    Ok((width, height, plane))
}

/// Loads a video stored as a directory of PGM frames, sorted by file name.
pub fn read_pgm_dir(dir: &Path) -> Result<Volume> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "pgm").unwrap_or(false))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Format(format!("no PGM frames in {}", dir.display())));
    }
    let (width, height, first) = read_pgm(&paths[0])?;
    let mut frames = vec![first];
    for p in &paths[1..] {
        let (w, h, plane) = read_pgm(p)?;
        if w != width || h != height {
            return Err(Error::Format("frame dimensions differ".into()));
        }
        frames.push(plane);
    }
    Ok(Volume { width, height, frames })
}
