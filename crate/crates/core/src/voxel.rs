//! ISC1 voxel-grid files.
//!
//! Layout, all little-endian:
//!
//! | offset | type     | field                          |
//! |--------|----------|--------------------------------|
//! | 0      | [u8; 4]  | magic `ISC1`                   |
//! | 4      | f64 × 3  | θ start, stop, step (degrees)  |
//! | 28     | f64 × 3  | φ start, stop, step (degrees)  |
//! | 52     | u32 × 3  | θ count, φ count, bin count    |
//! | 64     | f64      | bin width (m)                  |
//! | 72     | f64      | range of bin 0 (m)             |
//! | 80     | f32 × N  | VV, θ-major then φ then bin    |
//! | 80+4N  | f32 × N  | VH, same order                 |
//!
//! with N = θ count × φ count × bin count.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::imaging::{AngleAxis, Field3, PolarimetricImage, ScanGrid};
use crate::radar::RangeAxis;

pub const MAGIC: &[u8; 4] = b"ISC1";
pub const HEADER_LEN: usize = 80;

pub fn encode(image: &PolarimetricImage) -> Vec<u8> {
    let g = &image.grid;
    let (tc, pc, bc) = g.shape();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * g.voxel_count());
    out.extend_from_slice(MAGIC);
    for v in [
        g.theta.start,
        g.theta.stop,
        g.theta.step,
        g.phi.start,
        g.phi.stop,
        g.phi.step,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for n in [tc, pc, bc] {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    out.extend_from_slice(&g.range_axis.bin_width.to_le_bytes());
    out.extend_from_slice(&g.range_axis.origin.to_le_bytes());
    for field in [&image.vv, &image.vh] {
        for v in field.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn write(image: &PolarimetricImage, mut w: impl Write) -> Result<()> {
    w.write_all(&encode(image))?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let chunk = self.bytes.get(self.pos..end).ok_or_else(|| Error::Decode {
            offset: self.pos as u64,
            message: format!("truncated while reading {what}"),
        })?;
        self.pos = end;
        Ok(chunk.try_into().expect("length checked"))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(what)?))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(what)?))
    }
}

fn bad(offset: usize, message: impl Into<String>) -> Error {
    Error::Decode {
        offset: offset as u64,
        message: message.into(),
    }
}

pub fn decode(bytes: &[u8]) -> Result<PolarimetricImage> {
    let mut c = Cursor { bytes, pos: 0 };
    if &c.take::<4>("magic")? != MAGIC {
        return Err(bad(0, "bad magic, expected ISC1"));
    }
    let theta = AngleAxis {
        start: c.f64("theta start")?,
        stop: c.f64("theta stop")?,
        step: c.f64("theta step")?,
    };
    let phi = AngleAxis {
        start: c.f64("phi start")?,
        stop: c.f64("phi stop")?,
        step: c.f64("phi step")?,
    };
    theta.validate().map_err(|e| bad(4, e.to_string()))?;
    phi.validate().map_err(|e| bad(28, e.to_string()))?;
    let counts_at = c.pos;
    let counts = [
        c.u32("theta count")?,
        c.u32("phi count")?,
        c.u32("bin count")?,
    ];
    let bin_width = c.f64("bin width")?;
    let origin = c.f64("range origin")?;
    if counts[0] as usize != theta.count() {
        return Err(bad(
            counts_at,
            format!(
                "theta count {} disagrees with axis bounds ({})",
                counts[0],
                theta.count()
            ),
        ));
    }
    if counts[1] as usize != phi.count() {
        return Err(bad(
            counts_at + 4,
            format!(
                "phi count {} disagrees with axis bounds ({})",
                counts[1],
                phi.count()
            ),
        ));
    }
    let range_axis = RangeAxis::new(counts[2] as usize, bin_width, origin)
        .map_err(|e| bad(counts_at + 8, e.to_string()))?;
    let grid = ScanGrid::new(theta, phi, range_axis).map_err(|e| bad(4, e.to_string()))?;

    let n = grid.voxel_count();
    let expected = HEADER_LEN + 8 * n;
    if bytes.len() != expected {
        return Err(bad(
            bytes.len().min(expected),
            format!(
                "expected {expected} bytes for {n} voxels per field, found {}",
                bytes.len()
            ),
        ));
    }
    let read_field = |start: usize| -> Vec<f32> {
        bytes[start..start + 4 * n]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
            .collect()
    };
    let vv = read_field(HEADER_LEN);
    let vh = read_field(HEADER_LEN + 4 * n);
    for (base, field) in [(HEADER_LEN, &vv), (HEADER_LEN + 4 * n, &vh)] {
        if let Some(i) = field.iter().position(|v| v.is_nan()) {
            return Err(bad(base + 4 * i, "NaN voxel"));
        }
    }
    let shape = grid.shape();
    PolarimetricImage::new(
        grid,
        Field3::from_vec(shape, vv)?,
        Field3::from_vec(shape, vh)?,
    )
}

pub fn read(mut r: impl Read) -> Result<PolarimetricImage> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn save(image: &PolarimetricImage, path: impl AsRef<std::path::Path>) -> Result<()> {
    std::fs::write(path, encode(image))?;
    Ok(())
}

pub fn load(path: impl AsRef<std::path::Path>) -> Result<PolarimetricImage> {
    decode(&std::fs::read(path)?)
}
