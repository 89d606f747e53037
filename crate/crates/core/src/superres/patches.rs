use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::superres::image::GrayImage;

/// Overlapping square patches, one per column, each vectorized column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchGrid {
    pub patch_size: usize,
    pub overlap: usize,
    /// Top-left corner `(x, y)` of each patch, in column order of `patches`.
    pub offsets: Vec<(usize, usize)>,
    pub patches: Mat,
}

/// Patch start positions along one axis: stride `p − v`, with a final
/// position flush with the border when the stride does not land there.
pub fn patch_starts(len: usize, p: usize, v: usize) -> Vec<usize> {
    let stride = p - v;
    let last = len - p;
    let mut starts: Vec<usize> = (0..=last).step_by(stride).collect();
    if *starts.last().expect("0 is always a start") != last {
        starts.push(last);
    }
    starts
}

fn check_geometry(width: usize, height: usize, p: usize, v: usize) -> Result<()> {
    if p == 0 || v >= p {
        return Err(Error::InvalidArgument(format!(
            "patch size {p} with overlap {v}: need p ≥ 1 and v < p"
        )));
    }
    if p > width.min(height) {
        return Err(Error::InvalidArgument(format!(
            "patch size {p} exceeds the {width}×{height} image"
        )));
    }
    Ok(())
}

/// Offsets of every patch, `x` outer and `y` inner.
pub fn patch_offsets(width: usize, height: usize, p: usize, v: usize) -> Result<Vec<(usize, usize)>> {
    check_geometry(width, height, p, v)?;
    let ys = patch_starts(height, p, v);
    Ok(patch_starts(width, p, v)
        .into_iter()
        .flat_map(|x| ys.iter().map(move |&y| (x, y)))
        .collect())
}

pub fn extract_patches(img: &GrayImage, p: usize, v: usize) -> Result<PatchGrid> {
    let offsets = patch_offsets(img.width(), img.height(), p, v)?;
    let mut patches = Mat::zeros(p * p, offsets.len());
    for (j, &(ox, oy)) in offsets.iter().enumerate() {
        let col = patches.col_mut(j);
        for dx in 0..p {
            for dy in 0..p {
                col[dx * p + dy] = img.get(ox + dx, oy + dy);
            }
        }
    }
    Ok(PatchGrid {
        patch_size: p,
        overlap: v,
        offsets,
        patches,
    })
}

/// Places every patch at its offset and averages overlapping pixels.
pub fn assemble_patches(grid: &PatchGrid, width: usize, height: usize) -> Result<GrayImage> {
    let p = grid.patch_size;
    if grid.patches.shape() != (p * p, grid.offsets.len()) {
        return Err(Error::dim(format!(
            "patch matrix is {:?}, expected {}×{}",
            grid.patches.shape(),
            p * p,
            grid.offsets.len()
        )));
    }
    let mut sum = vec![0.0; width * height];
    let mut count = vec![0u32; width * height];
    for (j, &(ox, oy)) in grid.offsets.iter().enumerate() {
        if ox + p > width || oy + p > height {
            return Err(Error::dim(format!("patch at ({ox}, {oy}) leaves the {width}×{height} image")));
        }
        let col = grid.patches.col(j);
        for dx in 0..p {
            for dy in 0..p {
                let i = (oy + dy) * width + ox + dx;
                sum[i] += col[dx * p + dy];
                count[i] += 1;
            }
        }
    }
    if count.contains(&0) {
        return Err(Error::InvalidArgument("patches do not cover the image".into()));
    }
    let pixels = sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect();
    GrayImage::new(width, height, pixels)
}
