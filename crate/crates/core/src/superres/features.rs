use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rng;
use crate::superres::image::GrayImage;

/// Orientation of a 1-D feature kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// The four gradient kernels: first and second differences along each axis.
pub const FILTERS: [(&[f64], Axis); 4] = [
    (&[1.0, 0.0, 0.0, -1.0], Axis::Horizontal),
    (&[1.0, 0.0, 0.0, -1.0], Axis::Vertical),
    (&[0.5, 0.0, 0.0, -1.0, 0.0, 0.0, 0.5], Axis::Horizontal),
    (&[0.5, 0.0, 0.0, -1.0, 0.0, 0.0, 0.5], Axis::Vertical),
];

/// Bumped whenever [`FILTERS`] or their anchoring change.
pub const FILTERS_VERSION: u32 = 1;

/// Same-size correlation with a 1-D kernel anchored at `len / 2`, replicating edges.
pub fn correlate_1d(img: &GrayImage, kernel: &[f64], axis: Axis) -> Result<GrayImage> {
    let len = match axis {
        Axis::Horizontal => img.width(),
        Axis::Vertical => img.height(),
    };
    if kernel.len() > len {
        return Err(Error::InvalidArgument(format!(
            "kernel of length {} exceeds image extent {len}",
            kernel.len()
        )));
    }
    let c = (kernel.len() / 2) as isize;
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        kernel
            .iter()
            .enumerate()
            .map(|(t, k)| {
                let off = t as isize - c;
                let v = match axis {
                    Axis::Horizontal => img.get_clamped(x as isize + off, y as isize),
                    Axis::Vertical => img.get_clamped(x as isize, y as isize + off),
                };
                k * v
            })
            .sum()
    })
}

/// The image filtered by each of [`FILTERS`], in order.
pub fn feature_filters(img: &GrayImage) -> Result<[GrayImage; 4]> {
    let out = FILTERS
        .iter()
        .map(|(k, axis)| correlate_1d(img, k, *axis))
        .collect::<Result<Vec<_>>>()?;
    Ok(out.try_into().expect("four filters"))
}

/// Principal subspace of a feature matrix (features as columns).
#[derive(Clone, Debug, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// `dim × retained` with orthonormal columns.
    pub basis: Mat,
    /// Trailing basis vectors that came from a random orthonormal
    /// complement because the data had lower rank than requested.
    pub padded: usize,
}

struct Spectrum {
    mean: Vec<f64>,
    values: Vec<f64>,
    vectors: Mat,
}

const RANK_RTOL: f64 = 1e-10;

fn spectrum(features: &Mat) -> Result<Spectrum> {
    let (dim, n) = features.shape();
    if dim == 0 || n == 0 {
        return Err(Error::InvalidArgument("PCA needs a non-empty feature matrix".into()));
    }
    let mean: Vec<f64> = (0..dim)
        .map(|i| (0..n).map(|j| features.get(i, j)).sum::<f64>() / n as f64)
        .collect();
    let centered = Mat::from_fn(dim, n, |i, j| features.get(i, j) - mean[i]);
    let cov = centered.inner() * centered.inner().transpose();
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let mut vectors = Mat::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    for c in 0..dim {
        canonical_sign(vectors.col_mut(c));
    }
    Ok(Spectrum { mean, values, vectors })
}

fn canonical_sign(v: &mut [f64]) {
    let pivot = v.iter().copied().fold(0.0_f64, |b, x| if x.abs() > b.abs() { x } else { b });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Smallest dimension whose leading components hold `fraction` of the variance
/// (at least 1).
pub fn pca_retained_dim(features: &Mat, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("variance fraction {fraction} outside (0, 1]")));
    }
    let s = spectrum(features)?;
    let total: f64 = s.values.iter().sum();
    if total == 0.0 {
        return Ok(1);
    }
    let mut acc = 0.0;
    for (i, v) in s.values.iter().enumerate() {
        acc += v;
        if acc >= fraction * total * (1.0 - 1e-12) {
            return Ok(i + 1);
        }
    }
    Ok(s.values.len())
}

/// Top `retained_dim` principal directions of the mean-centred features.
/// Directions beyond the numerical rank are filled with a seeded orthonormal
/// complement and counted in [`Pca::padded`].
pub fn pca_fit(features: &Mat, retained_dim: usize, seed: u64) -> Result<Pca> {
    let dim = features.rows();
    if retained_dim == 0 || retained_dim > dim {
        return Err(Error::InvalidArgument(format!(
            "retained dimension {retained_dim} outside 1..={dim}"
        )));
    }
    let s = spectrum(features)?;
    let top = s.values[0];
    let rank = s.values.iter().filter(|&&v| v > RANK_RTOL * top && v > 0.0).count();
    let kept = retained_dim.min(rank);
    let mut cols: Vec<Vec<f64>> = (0..kept).map(|c| s.vectors.col(c).to_vec()).collect();
    let mut r = rng::seeded(rng::derive_seed(seed, &[b"pca-pad"]));
    while cols.len() < retained_dim {
        let mut v = rng::unit_vector(&mut r, dim);
        for _ in 0..2 {
            for c in &cols {
                let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            v.iter_mut().for_each(|x| *x /= n);
            cols.push(v);
        }
    }
    Ok(Pca {
        mean: s.mean,
        basis: Mat::from_columns(dim, &cols)?,
        padded: retained_dim - kept,
    })
}

/// [`pca_fit`] with the dimension chosen by [`pca_retained_dim`].
pub fn pca_fit_variance(features: &Mat, fraction: f64, seed: u64) -> Result<Pca> {
    pca_fit(features, pca_retained_dim(features, fraction)?, seed)
}

impl Pca {
    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn retained(&self) -> usize {
        self.basis.cols()
    }

    /// `basisᵀ (features − mean)`.
    pub fn apply(&self, features: &Mat) -> Result<Mat> {
        if features.rows() != self.dim() {
            return Err(Error::dim(format!(
                "features have {} rows, PCA expects {}",
                features.rows(),
                self.dim()
            )));
        }
        let centered = Mat::from_fn(features.rows(), features.cols(), |i, j| {
            features.get(i, j) - self.mean[i]
        });
        self.basis.tr_matmul(&centered)
    }

    /// `basis · codes + mean`.
    pub fn reconstruct(&self, codes: &Mat) -> Result<Mat> {
        let mut out = self.basis.matmul(codes)?;
        for j in 0..out.cols() {
            out.col_mut(j).iter_mut().zip(&self.mean).for_each(|(v, m)| *v += m);
        }
        Ok(out)
    }
}

pub fn pca_apply(pca: &Pca, features: &Mat) -> Result<Mat> {
    pca.apply(features)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(m: usize, n: usize, seed: u64) -> Mat {
        let mut r = rng::seeded(seed);
        Mat::from_fn(m, n, |_, _| rng::standard_normal(&mut r))
    }

    #[test]
    fn filters_annihilate_constants() {
        let img = GrayImage::filled(9, 8, 0.7).unwrap();
        for out in feature_filters(&img).unwrap() {
            assert!(out.pixels().iter().all(|v| v.abs() < 1e-15));
        }
    }

    #[test]
    fn horizontal_ramp() {
        let img = GrayImage::from_fn(12, 10, |x, _| 0.05 * x as f64).unwrap();
        let [f1, f2, f3, f4] = feature_filters(&img).unwrap();
        for y in 0..10 {
            for x in 2..11 {
                assert!((f1.get(x, y) + 0.15).abs() < 1e-12);
            }
            for x in 3..9 {
                assert!(f3.get(x, y).abs() < 1e-12);
            }
            for x in 0..12 {
                assert_eq!(f2.get(x, y), 0.0);
                assert_eq!(f4.get(x, y), 0.0);
            }
        }
    }

    #[test]
    fn impulse_reproduces_footprint() {
        let mut img = GrayImage::filled(11, 11, 0.0).unwrap();
        img.set(5, 5, 1.0);
        let out = feature_filters(&img).unwrap();
        for (f, (kernel, axis)) in out.iter().zip(FILTERS) {
            let c = (kernel.len() / 2) as isize;
            for (t, k) in kernel.iter().enumerate() {
                // correlation: output at 5 − (t − c) picks up kernel tap t
                let pos = (5 - (t as isize - c)) as usize;
                let v = match axis {
                    Axis::Horizontal => f.get(pos, 5),
                    Axis::Vertical => f.get(5, pos),
                };
                assert_eq!(v, *k);
            }
            let mass: f64 = f.pixels().iter().map(|v| v.abs()).sum();
            assert!((mass - kernel.iter().map(|v| v.abs()).sum::<f64>()).abs() < 1e-15);
        }
    }

    #[test]
    fn kernel_longer_than_image_is_rejected() {
        assert!(feature_filters(&GrayImage::filled(6, 9, 0.0).unwrap()).is_err());
    }

    #[test]
    fn subspace_features_reconstruct_exactly() {
        let basis = gaussian(7, 3, 1);
        let codes = gaussian(3, 40, 2);
        let mut feats = basis.matmul(&codes).unwrap();
        for j in 0..40 {
            feats.col_mut(j).iter_mut().enumerate().for_each(|(i, v)| *v += i as f64);
        }
        let pca = pca_fit(&feats, 3, 0).unwrap();
        assert_eq!(pca.padded, 0);
        let back = pca.reconstruct(&pca.apply(&feats).unwrap()).unwrap();
        assert!((&back - &feats).max_abs() < 1e-10);
        assert_eq!(pca_retained_dim(&feats, 0.999).unwrap(), 3);
    }

    #[test]
    fn isotropic_full_dimension_preserves_variance() {
        let feats = gaussian(5, 400, 3);
        let pca = pca_fit(&feats, 5, 0).unwrap();
        let gram = pca.basis.tr_matmul(&pca.basis).unwrap();
        assert!((&gram - &Mat::identity(5)).max_abs() < 1e-12);
        let codes = pca.apply(&feats).unwrap();
        let centered = Mat::from_fn(5, 400, |i, j| feats.get(i, j) - pca.mean[i]);
        assert!((codes.frob_norm_sq() - centered.frob_norm_sq()).abs() < 1e-9 * centered.frob_norm_sq());
        // eigenvalues of the sample covariance appear as per-component variances
        let cov = centered.inner() * centered.inner().transpose();
        let mut want: Vec<f64> = SymmetricEigen::new(cov).eigenvalues.iter().copied().collect();
        want.sort_by(|a, b| b.total_cmp(a));
        for (c, w) in want.iter().enumerate() {
            let got: f64 = codes.row(c).iter().map(|v| v * v).sum();
            assert!((got - w).abs() < 1e-9 * w);
        }
    }

    #[test]
    fn rank_one_features_need_one_component() {
        let u = [1.0, -2.0, 0.5, 0.0];
        let feats = Mat::from_fn(4, 30, |i, j| u[i] * (j as f64 - 7.0));
        assert_eq!(pca_retained_dim(&feats, 0.999).unwrap(), 1);
        let pca = pca_fit(&feats, 1, 0).unwrap();
        let back = pca.reconstruct(&pca.apply(&feats).unwrap()).unwrap();
        assert!((&back - &feats).max_abs() < 1e-10);
    }

    #[test]
    fn excess_dimension_is_padded_orthonormally() {
        let u = [1.0, 2.0, 3.0];
        let feats = Mat::from_fn(3, 10, |i, j| u[i] * j as f64);
        let pca = pca_fit(&feats, 3, 9).unwrap();
        assert_eq!(pca.padded, 2);
        let gram = pca.basis.tr_matmul(&pca.basis).unwrap();
        assert!((&gram - &Mat::identity(3)).max_abs() < 1e-12);
        assert_eq!(pca, pca_fit(&feats, 3, 9).unwrap());
        assert!(pca_fit(&feats, 4, 0).is_err());
        assert!(pca_fit(&feats, 0, 0).is_err());
    }
}
