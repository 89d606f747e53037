//! Learned dictionaries and their on-disk form.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::admm::SolveReport;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::matio::{read_matrix, write_matrix};

/// Convergence trace of whichever learner produced a model.
#[derive(Clone, Debug, PartialEq)]
pub enum History {
    Admm(SolveReport),
    /// `‖Y − DX‖_F` after each outer iteration of an alternating learner.
    Alternating(Vec<f64>),
}

impl History {
    pub fn to_csv(&self) -> String {
        match self {
            History::Admm(r) => r.to_csv(),
            History::Alternating(obj) => {
                let mut out = String::from("iter,objective\n");
                for (i, v) in obj.iter().enumerate() {
                    out.push_str(&format!("{},{v:?}\n", i + 1));
                }
                out
            }
        }
    }
}

/// Dictionary `D` (`M × K`, unit-norm columns) and coefficients `X` (`K × N`).
#[derive(Clone, Debug, PartialEq)]
pub struct LearnedModel {
    pub dictionary: Mat,
    pub coefficients: Mat,
    /// Atoms that carried no energy and were refilled with random unit vectors.
    pub dead_atoms: BTreeSet<usize>,
    pub history: History,
}

impl LearnedModel {
    pub fn k_atoms(&self) -> usize {
        self.dictionary.cols()
    }

    pub fn reconstruct(&self) -> Result<Mat> {
        self.dictionary.matmul(&self.coefficients)
    }

    /// Writes `dictionary.<ext>`, `coefficients.<ext>` and `report.csv` into `dir`.
    pub fn save(&self, dir: &Path, ext: &str) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_matrix(dir.join(format!("dictionary.{ext}")), &self.dictionary)?;
        write_matrix(dir.join(format!("coefficients.{ext}")), &self.coefficients)?;
        fs::write(dir.join("report.csv"), self.history.to_csv())?;
        Ok(())
    }

    /// Reads a dictionary written by [`LearnedModel::save`], trying the
    /// binary and CSV forms in turn.
    pub fn load_dictionary(dir: &Path) -> Result<Mat> {
        for name in ["dictionary.roadmat", "dictionary.csv"] {
            let p = dir.join(name);
            if p.exists() {
                return read_matrix(p);
            }
        }
        Err(Error::InvalidArgument(format!(
            "no dictionary file in {}",
            dir.display()
        )))
    }
}
