//! Static raster output: a grayscale map of one (θ, φ) slice or of the
//! maximum over range, with optional isoline overlays in red.
//!
//! Columns follow φ (increasing to the right), rows follow θ with the
//! highest elevation on top. Each grid sample covers `scale × scale` pixels.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::Result;
use crate::isolines::Slice;

pub const OVERLAY: Rgb<u8> = Rgb([255, 0, 0]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub scale: u32,
    /// Levels more than this many dB below the maximum render black.
    pub dynamic_range: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            scale: 4,
            dynamic_range: 40.0,
        }
    }
}

fn gray(v: f64, top: f64, span: f64) -> u8 {
    if !v.is_finite() || !top.is_finite() {
        return 0;
    }
    let t = ((v - (top - span)) / span).clamp(0.0, 1.0);
    (t * 255.0).round() as u8
}

/// Pixel centre of a fractional (row, col) grid position.
fn pixel_of(slice: &Slice, row: f64, col: f64, scale: u32) -> (i64, i64) {
    let s = scale as f64;
    let x = (col + 0.5) * s - 0.5;
    let y = ((slice.rows() - 1) as f64 - row + 0.5) * s - 0.5;
    (x.round() as i64, y.round() as i64)
}

fn plot_line(img: &mut RgbImage, (x0, y0): (i64, i64), (x1, y1): (i64, i64)) {
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    loop {
        if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, OVERLAY);
        }
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Render `slice`; `overlays` are polylines in (θ°, φ°) on the slice axes.
pub fn render_slice(slice: &Slice, overlays: &[Vec<(f64, f64)>], opts: RenderOptions) -> RgbImage {
    let scale = opts.scale.max(1);
    let (rows, cols) = (slice.rows() as u32, slice.cols() as u32);
    let top = slice
        .values()
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let span = opts.dynamic_range.max(f64::MIN_POSITIVE);
    let mut img = RgbImage::new(cols * scale, rows * scale);
    for (x, y, px) in img.enumerate_pixels_mut() {
        let j = (x / scale) as usize;
        let i = (rows - 1 - y / scale) as usize;
        let g = gray(slice.get(i, j), top, span);
        *px = Rgb([g, g, g]);
    }
    for line in overlays {
        let pts: Vec<_> = line
            .iter()
            .map(|&(t, p)| pixel_of(slice, slice.theta.position(t), slice.phi.position(p), scale))
            .collect();
        if let [only] = pts.as_slice() {
            plot_line(&mut img, *only, *only);
        }
        for w in pts.windows(2) {
            plot_line(&mut img, w[0], w[1]);
        }
    }
    img
}

pub fn save_png(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    img.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}
