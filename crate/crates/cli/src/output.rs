//! Writes that are read back and compared before a command reports success.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use road_core::kvconfig::KvConfig;
use road_core::matio::{read_matrix, write_matrix};
use road_core::superres::{read_pgm, write_pgm, GrayImage};
use road_core::Mat;

pub const RUN_MANIFEST: &str = "run-manifest.txt";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum MatFormat {
    Roadmat,
    Csv,
}

impl MatFormat {
    pub fn ext(self) -> &'static str {
        match self {
            MatFormat::Roadmat => "roadmat",
            MatFormat::Csv => "csv",
        }
    }
}

pub fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn matrix(dir: &Path, stem: &str, fmt: MatFormat, m: &Mat) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.{}", fmt.ext()));
    write_matrix(&path, m).with_context(|| format!("writing {}", path.display()))?;
    let back = read_matrix(&path).with_context(|| format!("re-reading {}", path.display()))?;
    // CSV stores shortest round-trip decimals, so both formats compare exactly.
    if back != *m {
        bail!("{} did not round-trip", path.display());
    }
    Ok(path)
}

pub fn text(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    if fs::read_to_string(path)? != contents {
        bail!("{} did not round-trip", path.display());
    }
    Ok(())
}

pub fn manifest(dir: &Path, kv: &KvConfig) -> Result<()> {
    text(&dir.join(RUN_MANIFEST), &kv.to_text())
}

pub fn image(path: &Path, img: &GrayImage) -> Result<()> {
    write_pgm(img, path).with_context(|| format!("writing {}", path.display()))?;
    let back = read_pgm(path).with_context(|| format!("re-reading {}", path.display()))?;
    if !back.same_size(img) {
        bail!("{} did not round-trip", path.display());
    }
    Ok(())
}
