use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;
use crate::superres::image::GrayImage;
use crate::superres::resize::resize_to;

enum Shape {
    Disc { cx: f64, cy: f64, r: f64 },
    Rect { cx: f64, cy: f64, hw: f64, hh: f64, cos: f64, sin: f64 },
    Band { nx: f64, ny: f64, d: f64, half: f64 },
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Disc { cx, cy, r } => (x - cx).powi(2) + (y - cy).powi(2) <= r * r,
            Shape::Rect { cx, cy, hw, hh, cos, sin } => {
                let (dx, dy) = (x - cx, y - cy);
                (dx * cos + dy * sin).abs() <= hw && (-dx * sin + dy * cos).abs() <= hh
            }
            Shape::Band { nx, ny, d, half } => (x * nx + y * ny - d).abs() <= half,
        }
    }
}

/// A piecewise-smooth test scene: a linear background gradient overlaid
/// with random discs, rotated rectangles and bands, anti-aliased by 4×4
/// supersampling.
pub fn synthetic_scene(width: usize, height: usize, seed: u64) -> Result<GrayImage> {
    let mut r = rng::seeded(seed);
    let (w, h) = (width as f64, height as f64);
    let base = r.random_range(0.2..0.6);
    let gx = r.random_range(-0.3..0.3) / w;
    let gy = r.random_range(-0.3..0.3) / h;
    let shapes: Vec<(Shape, f64)> = (0..8)
        .map(|_| {
            let cx = r.random_range(0.0..w);
            let cy = r.random_range(0.0..h);
            let size = r.random_range(0.08..0.3) * w.min(h);
            let shape = match r.random_range(0..3) {
                0 => Shape::Disc { cx, cy, r: size },
                1 => {
                    let a: f64 = r.random_range(0.0..std::f64::consts::PI);
                    Shape::Rect {
                        cx,
                        cy,
                        hw: size,
                        hh: size * r.random_range(0.3..1.0),
                        cos: a.cos(),
                        sin: a.sin(),
                    }
                }
                _ => {
                    let a: f64 = r.random_range(0.0..std::f64::consts::PI);
                    let (nx, ny) = (a.cos(), a.sin());
                    Shape::Band { nx, ny, d: cx * nx + cy * ny, half: 0.15 * size + 0.5 }
                }
            };
            (shape, r.random_range(0.0..1.0))
        })
        .collect();
    const SS: usize = 4;
    GrayImage::from_fn(width, height, |x, y| {
        let mut acc = 0.0;
        for sy in 0..SS {
            for sx in 0..SS {
                let px = x as f64 + (sx as f64 + 0.5) / SS as f64;
                let py = y as f64 + (sy as f64 + 0.5) / SS as f64;
                let mut v = base + gx * px + gy * py;
                for (shape, value) in &shapes {
                    if shape.contains(px, py) {
                        v = *value;
                    }
                }
                acc += v;
            }
        }
        (acc / (SS * SS) as f64).clamp(0.0, 1.0)
    })
}

/// A high-resolution scene and its bicubic reduction by an integer `scale`.
pub fn fixture_pair(size: usize, scale: usize, seed: u64) -> Result<(GrayImage, GrayImage)> {
    if scale == 0 || size % scale != 0 {
        return Err(Error::InvalidArgument(format!(
            "size {size} must be a positive multiple of scale {scale}"
        )));
    }
    let high = synthetic_scene(size, size, seed)?;
    let low = resize_to(&high, size / scale, size / scale)?;
    Ok((low, high))
}
