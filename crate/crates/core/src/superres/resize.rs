use crate::error::{Error, Result};
use crate::superres::image::GrayImage;

/// Cubic convolution kernel with `a = −0.5`.
pub fn cubic_kernel(t: f64) -> f64 {
    const A: f64 = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        ((A + 2.0) * t - (A + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((A * t - 5.0 * A) * t + 8.0 * A) * t - 4.0 * A
    } else {
        0.0
    }
}

/// Source taps for each output coordinate: four clamped indices and weights.
fn taps(n_in: usize, n_out: usize) -> Vec<([usize; 4], [f64; 4])> {
    let ratio = n_in as f64 / n_out as f64;
    (0..n_out)
        .map(|o| {
            let src = (o as f64 + 0.5) * ratio - 0.5;
            let base = src.floor();
            let frac = src - base;
            let mut idx = [0usize; 4];
            let mut w = [0.0; 4];
            for (t, (i, wt)) in idx.iter_mut().zip(w.iter_mut()).enumerate() {
                let off = t as f64 - 1.0;
                *i = (base + off).clamp(0.0, n_in as f64 - 1.0) as usize;
                *wt = cubic_kernel(frac - off);
            }
            let sum: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= sum);
            (idx, w)
        })
        .collect()
}

/// Bicubic resampling to an explicit output size, pixel-centre aligned,
/// with edge replication outside the image.
pub fn resize_to(img: &GrayImage, width: usize, height: usize) -> Result<GrayImage> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "resize target {width}×{height} has a zero dimension"
        )));
    }
    let tx = taps(img.width(), width);
    let ty = taps(img.height(), height);
    let rows: Vec<Vec<f64>> = (0..img.height())
        .map(|y| {
            tx.iter()
                .map(|(idx, w)| (0..4).map(|t| w[t] * img.get(idx[t], y)).sum())
                .collect()
        })
        .collect();
    GrayImage::from_fn(width, height, |x, y| {
        let (idx, w) = &ty[y];
        (0..4).map(|t| w[t] * rows[idx[t]][x]).sum()
    })
}

/// Bicubic resampling by `scale`; output dimensions are rounded to the nearest integer.
pub fn bicubic_resize(img: &GrayImage, scale: f64) -> Result<GrayImage> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
    }
    let w = (img.width() as f64 * scale).round() as usize;
    let h = (img.height() as f64 * scale).round() as usize;
    resize_to(img, w, h)
}
