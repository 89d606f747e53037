use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Single-channel image, row-major. Pixels are nominally in `[0, 1]` but may
/// leave that range in intermediate results; [`write_pgm`] clamps.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("image dimensions must be positive".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::dim(format!(
                "{} pixels for a {width}×{height} image",
                pixels.len()
            )));
        }
        Ok(GrayImage { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// Pixel with coordinates clamped to the image (edge replication).
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.pixels[y * self.width + x] = v;
    }

    pub fn same_size(&self, other: &GrayImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &GrayImage, f: impl Fn(f64, f64) -> f64) -> Result<GrayImage> {
        check_same(self, other)?;
        Ok(GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().zip(&other.pixels).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn clamped(&self) -> GrayImage {
        self.map(|v| v.clamp(0.0, 1.0))
    }
}

fn check_same(a: &GrayImage, b: &GrayImage) -> Result<()> {
    if !a.same_size(b) {
        return Err(Error::dim(format!(
            "images are {}×{} and {}×{}",
            a.width, a.height, b.width, b.height
        )));
    }
    Ok(())
}

/// Parses a binary 8-bit PGM (`P5`, max value ≤ 255).
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let bad = |msg: &str| Error::format("PGM", msg.to_string());
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err(bad("expected magic P5"));
    }
    let mut num = |what: &str| -> Result<usize> {
        token()?
            .parse()
            .map_err(|_| bad(&format!("bad {what}")))
    };
    let width = num("width")?;
    let height = num("height")?;
    let maxval = num("max value")?;
    if width == 0 || height == 0 {
        return Err(bad("zero dimension"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(bad(&format!("unsupported max value {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    let start = pos + 1;
    let n = width * height;
    if bytes.len() < start + n {
        return Err(bad("truncated raster"));
    }
    let pixels = bytes[start..start + n]
        .iter()
        .map(|&b| {
            if b as usize > maxval {
                Err(bad("sample exceeds max value"))
            } else {
                Ok(b as f64 / maxval as f64)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GrayImage::new(width, height, pixels)
}

/// Encodes as `P5` with max value 255, clamping to `[0, 1]` and rounding half up.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(
        img.pixels
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8),
    );
    out
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}

/// `10·log₁₀(Nₑ / ‖a − b‖²_F)` on `[0, 1]` pixels; `+∞` for identical images.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    check_same(a, b)?;
    let sq: f64 = a.pixels.iter().zip(&b.pixels).map(|(x, y)| (x - y) * (x - y)).sum();
    if sq == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (a.pixels.len() as f64 / sq).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_white_pixel() {
        let img = decode_pgm(b"P5\n1 1\n255\n\xff").unwrap();
        assert_eq!(img.pixels(), &[1.0]);
    }

    #[test]
    fn known_bytes_with_comment() {
        let img = decode_pgm(b"P5 # made by hand\n2 2\n# max\n255\n\x00\x33\xcc\xff").unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0.0, 0.2, 0.8, 1.0]);
        assert_eq!(img.get(1, 0), 0.2);
    }

    #[test]
    fn low_max_value_is_rescaled() {
        let img = decode_pgm(b"P5\n2 1\n15\n\x00\x0f").unwrap();
        assert_eq!(img.pixels(), &[0.0, 1.0]);
    }

    #[test]
    fn malformed_inputs() {
        for bytes in [
            &b"P2\n1 1\n255\n0"[..],
            b"P5\n1 1\n65535\n\x00\x00",
            b"P5\n2 2\n255\n\x00",
            b"P5\n0 1\n255\n",
            b"P5\nx 1\n255\n\x00",
            b"P5\n1",
            b"P5\n1 1\n10\n\xff",
        ] {
            assert!(decode_pgm(bytes).is_err(), "{bytes:?}");
        }
    }

    #[test]
    fn encode_clamps_and_rounds_half_up() {
        let img = GrayImage::new(4, 1, vec![-0.5, 1.5, 0.5 / 255.0, 127.5 / 255.0]).unwrap();
        let bytes = encode_pgm(&img);
        assert_eq!(&bytes[bytes.len() - 4..], &[0, 255, 1, 128]);
    }

    #[test]
    fn psnr_examples() {
        let a = GrayImage::filled(5, 3, 0.4).unwrap();
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let b = a.map(|v| v + 0.1);
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
        assert!(psnr(&a, &GrayImage::filled(3, 5, 0.4).unwrap()).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.pgm");
        let img = GrayImage::from_fn(3, 2, |x, y| (x + 3 * y) as f64 / 5.0).unwrap();
        write_pgm(&img, &p).unwrap();
        assert_eq!(read_pgm(&p).unwrap(), img);
    }

    proptest! {
        #[test]
        fn pgm_round_trip_within_quantization(w in 1usize..9, h in 1usize..9, seed in any::<u64>()) {
            let mut r = crate::rng::seeded(seed);
            let img = GrayImage::from_fn(w, h, |_, _| rand::Rng::random::<f64>(&mut r)).unwrap();
            let back = decode_pgm(&encode_pgm(&img)).unwrap();
            for (a, b) in img.pixels().iter().zip(back.pixels()) {
                prop_assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
            }
            prop_assert_eq!(decode_pgm(&encode_pgm(&back)).unwrap(), back);
        }

        #[test]
        fn psnr_matches_definition_and_is_symmetric(w in 1usize..7, h in 1usize..7, seed in any::<u64>()) {
            let mut r = crate::rng::seeded(seed);
            let a = GrayImage::from_fn(w, h, |_, _| rand::Rng::random::<f64>(&mut r)).unwrap();
            let b = GrayImage::from_fn(w, h, |_, _| rand::Rng::random::<f64>(&mut r)).unwrap();
            let mut sq = 0.0;
            for y in 0..h {
                for x in 0..w {
                    sq += (a.get(x, y) - b.get(x, y)).powi(2);
                }
            }
            let want = 10.0 * ((w * h) as f64 / sq).log10();
            prop_assert!((psnr(&a, &b).unwrap() - want).abs() < 1e-9);
            prop_assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
        }
    }
}
