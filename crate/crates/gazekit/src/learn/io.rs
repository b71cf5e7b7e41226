//! Binary serialization of learned artifacts: vocabularies, linear
//! models, kernel weights, and external Gram matrices.
//!
//! All containers share the same layout: a 4-byte magic, a little-endian
//! u16 version, little-endian u32 dimensions, then the payload as
//! little-endian f32.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::learn::kmeans::Vocabulary;
use crate::learn::svm::LinearModel;

const VOCAB_MAGIC: &[u8; 4] = b"GKVC";
const MODEL_MAGIC: &[u8; 4] = b"GKLM";
const WEIGHTS_MAGIC: &[u8; 4] = b"GKWT";
const GRAM_MAGIC: &[u8; 4] = b"GKGM";
const VERSION: u16 = 1;

fn write_header<W: Write>(w: &mut W, magic: &[u8; 4], dims: &[u32]) -> Result<()> {
    w.write_all(magic)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for &d in dims {
        w.write_all(&d.to_le_bytes())?;
    }
    Ok(())
}

fn read_header<R: Read>(r: &mut R, magic: &[u8; 4], ndims: usize) -> Result<Vec<u32>> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m)?;
    if &m != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            m,
            magic
        )));
    }
    let mut v = [0u8; 2];
    r.read_exact(&mut v)?;
    let version = u16::from_le_bytes(v);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut dims = Vec::with_capacity(ndims);
    for _ in 0..ndims {
        let mut b = [0u8; 4];
        r.read_exact(&mut b)?;
        dims.push(u32::from_le_bytes(b));
    }
    Ok(dims)
}

fn write_f32s<W: Write>(w: &mut W, values: impl Iterator<Item = f64>) -> Result<()> {
    for v in values {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    Ok(())
}

fn read_f32s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    let mut b = [0u8; 4];
    for _ in 0..n {
        r.read_exact(&mut b)?;
        out.push(f32::from_le_bytes(b) as f64);
    }
    Ok(out)
}

pub fn write_vocabulary<W: Write>(w: &mut W, vocab: &Vocabulary) -> Result<()> {
    let d = if vocab.k > 0 { vocab.centroids[0].len() } else { 0 };
    write_header(w, VOCAB_MAGIC, &[vocab.k as u32, d as u32])?;
    for c in &vocab.centroids {
        write_f32s(w, c.iter().cloned())?;
    }
    Ok(())
}

pub fn read_vocabulary<R: Read>(r: &mut R) -> Result<Vocabulary> {
    let dims = read_header(r, VOCAB_MAGIC, 2)?;
    let (k, d) = (dims[0] as usize, dims[1] as usize);
    let mut centroids = Vec::with_capacity(k);
    for _ in 0..k {
        centroids.push(read_f32s(r, d)?);
    }
    Ok(Vocabulary { centroids, k })
}

pub fn write_linear_model<W: Write>(w: &mut W, model: &LinearModel) -> Result<()> {
    write_header(w, MODEL_MAGIC, &[model.w.len() as u32])?;
    write_f32s(w, model.w.iter().cloned())?;
    write_f32s(w, [model.b, model.c].into_iter())?;
    Ok(())
}

pub fn read_linear_model<R: Read>(r: &mut R) -> Result<LinearModel> {
    let dims = read_header(r, MODEL_MAGIC, 1)?;
    let d = dims[0] as usize;
    let w = read_f32s(r, d)?;
    let tail = read_f32s(r, 2)?;
    Ok(LinearModel { w, b: tail[0], c: tail[1] })
}

/// Writes a flat weight vector (e.g. learned kernel weights).
pub fn write_weights<W: Write>(w: &mut W, weights: &[f64]) -> Result<()> {
    write_header(w, WEIGHTS_MAGIC, &[weights.len() as u32])?;
    write_f32s(w, weights.iter().cloned())
}

pub fn read_weights<R: Read>(r: &mut R) -> Result<Vec<f64>> {
    let dims = read_header(r, WEIGHTS_MAGIC, 1)?;
    read_f32s(r, dims[0] as usize)
}

/// Writes a row-major square Gram matrix.
pub fn write_gram<W: Write>(w: &mut W, gram: &[f64], n: usize) -> Result<()> {
    if gram.len() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "gram has {} entries, expected {}",
            gram.len(),
            n * n
        )));
    }
    write_header(w, GRAM_MAGIC, &[n as u32])?;
    write_f32s(w, gram.iter().cloned())
}

/// Reads a Gram matrix, returning (matrix, n).
pub fn read_gram<R: Read>(r: &mut R) -> Result<(Vec<f64>, usize)> {
    let dims = read_header(r, GRAM_MAGIC, 1)?;
    let n = dims[0] as usize;
    Ok((read_f32s(r, n * n)?, n))
}
