//! Patch-based single-image super-resolution with coupled dictionaries.
//!
//! Two training schemes share the same patch plumbing:
//!
//! * Yang: low and high patches are stacked into one training vector and a
//!   single dictionary is learned, then split into `d_low` and `d_high`;
//! * Zeyde: `d_low` is learned on low-resolution features alone and
//!   `d_high` is the least-squares map from the learned codes to the high
//!   patches. In feature mode the low side uses four gradient filters plus
//!   PCA and the high side predicts the residual over bicubic interpolation.
//!
//! Images are 8-bit binary PGM on disk and `[0, 1]` floats in memory.

mod features;
mod fixtures;
mod image;
mod model;
mod patches;
mod resize;

pub use features::{
    correlate_1d, feature_filters, pca_apply, pca_fit, pca_fit_variance, pca_retained_dim, Axis,
    Pca, FILTERS, FILTERS_VERSION,
};
pub use fixtures::{fixture_pair, synthetic_scene};
pub use image::{decode_pgm, encode_pgm, psnr, read_pgm, write_pgm, GrayImage};
pub use model::{
    apply_sr, high_dictionary, train_sr, train_yang, train_zeyde, SrCoder, SrConfig, SrMode,
    SrModel, TrainOutcome, HIGH_DICT_RIDGE,
};
pub use patches::{assemble_patches, extract_patches, patch_offsets, patch_starts, PatchGrid};
pub use resize::{bicubic_resize, cubic_kernel, resize_to};
