use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::baselines::{lasso_code_columns, omp_code};
use crate::error::{Error, Result};
use crate::kvconfig::KvConfig;
use crate::learner::{learn, Algorithm, LearnerParams};
use crate::linalg::{frob_norm, normalize_columns, solve_spd_right, Mat};
use crate::matio::{read_matrix, write_matrix};
use crate::model::LearnedModel;
use crate::superres::features::{feature_filters, pca_fit, pca_fit_variance, Pca, FILTERS_VERSION};
use crate::superres::image::GrayImage;
use crate::superres::patches::{assemble_patches, extract_patches, PatchGrid};
use crate::superres::resize::resize_to;

/// Ridge added to `X₀X₀ᵀ` when solving for the high-resolution dictionary.
pub const HIGH_DICT_RIDGE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SrMode {
    /// One dictionary learned on vertically stacked low/high patch pairs.
    Yang,
    /// Low-resolution dictionary learned alone; high-resolution dictionary by least squares.
    Zeyde,
}

impl fmt::Display for SrMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SrMode::Yang => "yang",
            SrMode::Zeyde => "zeyde",
        })
    }
}

impl FromStr for SrMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "yang" => Ok(SrMode::Yang),
            "zeyde" => Ok(SrMode::Zeyde),
            _ => Err(Error::Config(format!("unknown mode {s:?}; expected yang or zeyde"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SrConfig {
    pub mode: SrMode,
    /// Integer magnification; high images are exactly `scale` times the low ones.
    pub scale: usize,
    pub patch_size: usize,
    pub overlap: usize,
    pub k: usize,
    pub learner: Algorithm,
    pub params: LearnerParams,
    /// Zeyde only: gradient features with PCA on the low side and
    /// residual targets on the high side.
    pub use_features: bool,
    /// Fixed PCA dimension; `None` keeps `pca_variance` of the variance.
    pub pca_dim: Option<usize>,
    pub pca_variance: f64,
}

impl SrConfig {
    /// 6×6 patches overlapping by 2, raw intensities.
    pub fn yang(k: usize) -> Self {
        SrConfig {
            mode: SrMode::Yang,
            scale: 2,
            patch_size: 6,
            overlap: 2,
            k,
            learner: Algorithm::RoadExact,
            params: LearnerParams::default(),
            use_features: false,
            pca_dim: None,
            pca_variance: 0.999,
        }
    }

    /// 9×9 patches overlapping by 6, gradient features with PCA.
    pub fn zeyde(k: usize) -> Self {
        SrConfig {
            mode: SrMode::Zeyde,
            patch_size: 9,
            overlap: 6,
            use_features: true,
            ..Self::yang(k)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale == 0 {
            return Err(Error::Config("scale must be positive".into()));
        }
        if self.patch_size == 0 || self.overlap >= self.patch_size {
            return Err(Error::Config(format!(
                "patch size {} with overlap {} is invalid",
                self.patch_size, self.overlap
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        if self.use_features && self.mode == SrMode::Yang {
            return Err(Error::Config("gradient features are only used in zeyde mode".into()));
        }
        if !(self.pca_variance > 0.0 && self.pca_variance <= 1.0) {
            return Err(Error::Config(format!("pca_variance {} outside (0, 1]", self.pca_variance)));
        }
        Ok(())
    }
}

/// Coupled dictionaries sharing one coefficient space.
#[derive(Clone, Debug, PartialEq)]
pub struct SrModel {
    pub mode: SrMode,
    pub scale: usize,
    pub patch_size: usize,
    pub overlap: usize,
    pub use_features: bool,
    pub d_low: Mat,
    pub d_high: Mat,
    pub pca: Option<Pca>,
}

/// A trained model with the learner's output and any conditions worth reporting.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: SrModel,
    pub learned: LearnedModel,
    pub warnings: Vec<String>,
}

/// How `apply_sr` codes low-resolution patches against `d_low`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SrCoder {
    /// λ per patch is `lambda_rel · max|D̃ᵀy|` with `D̃` the column-normalized `d_low`.
    Lasso { lambda_rel: f64, max_inner: usize, tol: f64 },
    Omp { s: usize },
}

impl Default for SrCoder {
    fn default() -> Self {
        SrCoder::Lasso {
            lambda_rel: 0.1,
            max_inner: 500,
            tol: 1e-6,
        }
    }
}

fn upsample(low: &GrayImage, scale: usize) -> Result<GrayImage> {
    resize_to(low, low.width() * scale, low.height() * scale)
}

fn check_pair(low: &GrayImage, high: &GrayImage, scale: usize) -> Result<()> {
    if high.width() != low.width() * scale || high.height() != low.height() * scale {
        return Err(Error::dim(format!(
            "high image {}×{} is not {scale}× the low image {}×{}",
            high.width(),
            high.height(),
            low.width(),
            low.height()
        )));
    }
    Ok(())
}

/// Raw patches, or the four filter responses' patches stacked vertically.
fn low_patch_matrix(interp: &GrayImage, p: usize, v: usize, use_features: bool) -> Result<Mat> {
    if !use_features {
        return Ok(extract_patches(interp, p, v)?.patches);
    }
    let mut out: Option<Mat> = None;
    for f in feature_filters(interp)? {
        let patches = extract_patches(&f, p, v)?.patches;
        out = Some(match out {
            None => patches,
            Some(acc) => Mat::vstack(&acc, &patches)?,
        });
    }
    Ok(out.expect("four filters"))
}

fn hstack_all(parts: Vec<Mat>) -> Result<Mat> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("no training images".into()));
    }
    Mat::hstack(&parts)
}

/// Learns on unit-RMS data and returns the coefficients at the original scale.
fn learn_scaled(y: &Mat, cfg: &SrConfig) -> Result<LearnedModel> {
    let (m, n) = y.shape();
    let rms = frob_norm(y) / ((m * n) as f64).sqrt();
    if rms == 0.0 {
        return Err(Error::InvalidArgument("training patches are all zero".into()));
    }
    let mut model = learn(cfg.learner, &y.scaled(1.0 / rms), cfg.k, &cfg.params)?;
    model.coefficients = model.coefficients.scaled(rms);
    Ok(model)
}

fn note_dead_atoms(learned: &LearnedModel, warnings: &mut Vec<String>) {
    if !learned.dead_atoms.is_empty() {
        warnings.push(format!(
            "{} atoms carried no energy and were replaced by random unit vectors",
            learned.dead_atoms.len()
        ));
    }
}

/// Stacks `[P_L; P_H]` from bicubically upsampled low images and their high
/// counterparts, learns one dictionary and splits its rows.
pub fn train_yang(lows: &[GrayImage], highs: &[GrayImage], cfg: &SrConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if cfg.mode != SrMode::Yang {
        return Err(Error::Config("train_yang needs mode yang".into()));
    }
    if lows.len() != highs.len() {
        return Err(Error::dim(format!("{} low images, {} high images", lows.len(), highs.len())));
    }
    let (p, v) = (cfg.patch_size, cfg.overlap);
    let mut parts = Vec::with_capacity(lows.len());
    for (low, high) in lows.iter().zip(highs) {
        check_pair(low, high, cfg.scale)?;
        let pl = extract_patches(&upsample(low, cfg.scale)?, p, v)?.patches;
        let ph = extract_patches(high, p, v)?.patches;
        parts.push(Mat::vstack(&pl, &ph)?);
    }
    let y = hstack_all(parts)?;
    let learned = learn_scaled(&y, cfg)?;
    let d = &learned.dictionary;
    let mut warnings = Vec::new();
    note_dead_atoms(&learned, &mut warnings);
    Ok(TrainOutcome {
        model: SrModel {
            mode: SrMode::Yang,
            scale: cfg.scale,
            patch_size: p,
            overlap: v,
            use_features: false,
            d_low: d.row_block(0, p * p),
            d_high: d.row_block(p * p, p * p),
            pca: None,
        },
        warnings,
        learned,
    })
}

/// `D_H = P_H X₀ᵀ (X₀X₀ᵀ + ridge·I)⁻¹`. Returns the dictionary and the number
/// of unused atoms (all-zero coefficient rows), which make the Gram singular.
pub fn high_dictionary(p_h: &Mat, x0: &Mat) -> Result<(Mat, usize)> {
    if p_h.cols() != x0.cols() {
        return Err(Error::dim(format!(
            "{} high patches for {} coefficient columns",
            p_h.cols(),
            x0.cols()
        )));
    }
    let k = x0.rows();
    let mut gram = x0.matmul(&x0.t())?;
    for i in 0..k {
        gram.set(i, i, gram.get(i, i) + HIGH_DICT_RIDGE);
    }
    let rhs = p_h.matmul(&x0.t())?;
    let unused = (0..k).filter(|&i| x0.row(i).iter().all(|v| *v == 0.0)).count();
    Ok((solve_spd_right(&rhs, &gram)?, unused))
}

/// Learns `d_low` on low-resolution features (raw patches, or filtered
/// patches reduced by PCA), then fits `d_high` by least squares to the high
/// patches (raw, or the residual after subtracting the interpolated image).
pub fn train_zeyde(lows: &[GrayImage], highs: &[GrayImage], cfg: &SrConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if cfg.mode != SrMode::Zeyde {
        return Err(Error::Config("train_zeyde needs mode zeyde".into()));
    }
    if lows.len() != highs.len() {
        return Err(Error::dim(format!("{} low images, {} high images", lows.len(), highs.len())));
    }
    let (p, v) = (cfg.patch_size, cfg.overlap);
    let mut low_parts = Vec::with_capacity(lows.len());
    let mut high_parts = Vec::with_capacity(lows.len());
    for (low, high) in lows.iter().zip(highs) {
        check_pair(low, high, cfg.scale)?;
        let interp = upsample(low, cfg.scale)?;
        low_parts.push(low_patch_matrix(&interp, p, v, cfg.use_features)?);
        let target = if cfg.use_features {
            high.zip_map(&interp, |h, l| h - l)?
        } else {
            high.clone()
        };
        high_parts.push(extract_patches(&target, p, v)?.patches);
    }
    let raw_low = hstack_all(low_parts)?;
    let p_h = hstack_all(high_parts)?;
    let mut warnings = Vec::new();
    let (features, pca) = if cfg.use_features {
        let pca = match cfg.pca_dim {
            Some(d) => pca_fit(&raw_low, d, cfg.params.seed)?,
            None => pca_fit_variance(&raw_low, cfg.pca_variance, cfg.params.seed)?,
        };
        if pca.padded > 0 {
            warnings.push(format!(
                "features have rank below the PCA dimension; {} directions padded",
                pca.padded
            ));
        }
        (pca.apply(&raw_low)?, Some(pca))
    } else {
        (raw_low, None)
    };
    let learned = learn_scaled(&features, cfg)?;
    note_dead_atoms(&learned, &mut warnings);
    let (d_high, unused) = high_dictionary(&p_h, &learned.coefficients)?;
    if unused > 0 {
        warnings.push(format!(
            "{unused} atoms have no coefficients; their high-resolution atoms come from the ridge"
        ));
    }
    Ok(TrainOutcome {
        model: SrModel {
            mode: SrMode::Zeyde,
            scale: cfg.scale,
            patch_size: p,
            overlap: v,
            use_features: cfg.use_features,
            d_low: learned.dictionary.clone(),
            d_high,
            pca,
        },
        warnings,
        learned,
    })
}

/// Dispatches to [`train_yang`] or [`train_zeyde`] by `cfg.mode`.
pub fn train_sr(lows: &[GrayImage], highs: &[GrayImage], cfg: &SrConfig) -> Result<TrainOutcome> {
    match cfg.mode {
        SrMode::Yang => train_yang(lows, highs, cfg),
        SrMode::Zeyde => train_zeyde(lows, highs, cfg),
    }
}

/// Sparse codes of `y` over `d`, computed on the column-normalized
/// dictionary and mapped back to `d`'s scale.
fn code(d: &Mat, y: &Mat, coder: SrCoder) -> Result<Mat> {
    let mut dn = d.clone();
    let norms = normalize_columns(&mut dn);
    let mut x = match coder {
        SrCoder::Lasso {
            lambda_rel,
            max_inner,
            tol,
        } => {
            if !(lambda_rel >= 0.0) {
                return Err(Error::InvalidArgument(format!("lambda_rel must be ≥ 0, got {lambda_rel}")));
            }
            let corr = dn.tr_matmul(y)?;
            let lambdas: Vec<f64> = (0..y.cols())
                .map(|j| lambda_rel * corr.col(j).iter().fold(0.0_f64, |m, v| m.max(v.abs())))
                .collect();
            lasso_code_columns(&dn, y, &lambdas, max_inner, tol)?
        }
        SrCoder::Omp { s } => omp_code(&dn, y, s)?.coefficients,
    };
    for (k, n) in norms.iter().enumerate() {
        let inv = if *n > 0.0 { 1.0 / n } else { 0.0 };
        for j in 0..x.cols() {
            x.set(k, j, x.get(k, j) * inv);
        }
    }
    Ok(x)
}

/// Upsamples `low`, codes its patches (or features) against `d_low`,
/// synthesizes high patches with `d_high` (adding back the interpolated
/// patches in feature mode), averages overlaps and clamps to `[0, 1]`.
pub fn apply_sr(model: &SrModel, low: &GrayImage, coder: SrCoder) -> Result<GrayImage> {
    model.validate()?;
    let interp = upsample(low, model.scale)?;
    let (p, v) = (model.patch_size, model.overlap);
    let mut feats = low_patch_matrix(&interp, p, v, model.use_features)?;
    if let Some(pca) = &model.pca {
        feats = pca.apply(&feats)?;
    }
    if feats.rows() != model.d_low.rows() {
        return Err(Error::dim(format!(
            "image pipeline yields {}-dimensional features, d_low has {} rows",
            feats.rows(),
            model.d_low.rows()
        )));
    }
    let alpha = code(&model.d_low, &feats, coder)?;
    let mut grid: PatchGrid = extract_patches(&interp, p, v)?;
    let synth = model.d_high.matmul(&alpha)?;
    grid.patches = if model.use_features {
        &grid.patches + &synth
    } else {
        synth
    };
    Ok(assemble_patches(&grid, interp.width(), interp.height())?.clamped())
}

const MANIFEST: &str = "manifest.txt";

impl SrModel {
    pub fn k_atoms(&self) -> usize {
        self.d_low.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let p2 = self.patch_size * self.patch_size;
        if self.d_low.cols() != self.d_high.cols() {
            return Err(Error::dim(format!(
                "d_low has {} atoms, d_high {}",
                self.d_low.cols(),
                self.d_high.cols()
            )));
        }
        if self.d_high.rows() != p2 {
            return Err(Error::dim(format!("d_high has {} rows, expected {p2}", self.d_high.rows())));
        }
        let low_rows = match &self.pca {
            Some(pca) => {
                if pca.dim() != 4 * p2 {
                    return Err(Error::dim(format!(
                        "PCA input dimension {} does not match {} filtered patch entries",
                        pca.dim(),
                        4 * p2
                    )));
                }
                pca.retained()
            }
            None if self.use_features => {
                return Err(Error::dim("feature mode needs a PCA basis".to_string()))
            }
            None => p2,
        };
        if self.d_low.rows() != low_rows {
            return Err(Error::dim(format!("d_low has {} rows, expected {low_rows}", self.d_low.rows())));
        }
        Ok(())
    }

    /// Writes `d_low`, `d_high`, the optional PCA basis and mean as binary
    /// matrices and a `manifest.txt` describing the pipeline.
    pub fn save(&self, dir: &Path) -> Result<()> {
        self.validate()?;
        fs::create_dir_all(dir)?;
        write_matrix(dir.join("d_low.roadmat"), &self.d_low)?;
        write_matrix(dir.join("d_high.roadmat"), &self.d_high)?;
        if let Some(pca) = &self.pca {
            write_matrix(dir.join("pca_basis.roadmat"), &pca.basis)?;
            write_matrix(
                dir.join("pca_mean.roadmat"),
                &Mat::from_col_major(pca.mean.len(), 1, pca.mean.clone())?,
            )?;
        }
        let mut kv = KvConfig::default();
        kv.set("mode", self.mode.to_string());
        kv.set("scale", self.scale.to_string());
        kv.set("patch_size", self.patch_size.to_string());
        kv.set("overlap", self.overlap.to_string());
        kv.set("use_features", self.use_features.to_string());
        kv.set("filters_version", FILTERS_VERSION.to_string());
        kv.set("k", self.k_atoms().to_string());
        if let Some(pca) = &self.pca {
            kv.set("pca_dim", pca.retained().to_string());
            kv.set("pca_padded", pca.padded.to_string());
        }
        fs::write(dir.join(MANIFEST), kv.to_text())?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let kv = KvConfig::load(dir.join(MANIFEST))?;
        let req = |key: &str| Error::format("model manifest", format!("missing {key}"));
        let version: u32 = kv.get("filters_version")?.ok_or_else(|| req("filters_version"))?;
        if version != FILTERS_VERSION {
            return Err(Error::format(
                "model manifest",
                format!("filters version {version}, this build uses {FILTERS_VERSION}"),
            ));
        }
        let use_features: bool = kv.get("use_features")?.ok_or_else(|| req("use_features"))?;
        let pca = if use_features {
            let mean = read_matrix(dir.join("pca_mean.roadmat"))?;
            Some(Pca {
                mean: mean.as_slice().to_vec(),
                basis: read_matrix(dir.join("pca_basis.roadmat"))?,
                padded: kv.get_or("pca_padded", 0)?,
            })
        } else {
            None
        };
        let model = SrModel {
            mode: kv.get("mode")?.ok_or_else(|| req("mode"))?,
            scale: kv.get("scale")?.ok_or_else(|| req("scale"))?,
            patch_size: kv.get("patch_size")?.ok_or_else(|| req("patch_size"))?,
            overlap: kv.get("overlap")?.ok_or_else(|| req("overlap"))?,
            use_features,
            d_low: read_matrix(dir.join("d_low.roadmat"))?,
            d_high: read_matrix(dir.join("d_high.roadmat"))?,
            pca,
        };
        model.validate()?;
        Ok(model)
    }
}
