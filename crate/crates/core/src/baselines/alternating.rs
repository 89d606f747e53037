use std::collections::BTreeSet;
use std::fmt;

use rand::seq::index::sample;

use crate::baselines::lasso::lasso_code;
use crate::baselines::omp::omp_code;
use crate::baselines::update::{fill_and_normalize, ksvd_update, mod_update};
use crate::error::{Error, Result};
use crate::linalg::{frob_norm, Mat};
use crate::model::{History, LearnedModel};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coder {
    /// Orthogonal matching pursuit with `S` atoms per column.
    Omp { s: usize },
    Lasso { lambda: f64, max_inner: usize, tol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Updater {
    Mod,
    Ksvd,
}

impl fmt::Display for Updater {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Updater::Mod => "mod",
            Updater::Ksvd => "ksvd",
        })
    }
}

/// Two-stage learner settings.
#[derive(Clone, Debug, PartialEq)]
pub struct AltConfig {
    pub coder: Coder,
    pub updater: Updater,
    pub outer_iters: usize,
    pub seed: u64,
}

impl AltConfig {
    pub fn new(coder: Coder, updater: Updater, outer_iters: usize, seed: u64) -> Result<Self> {
        let cfg = AltConfig {
            coder,
            updater,
            outer_iters,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.outer_iters == 0 {
            return Err(Error::Config("outer_iters must be at least 1".into()));
        }
        match self.coder {
            Coder::Omp { s } if s == 0 => Err(Error::Config("OMP sparsity must be positive".into())),
            Coder::Lasso { lambda, .. } if !(lambda >= 0.0) => {
                Err(Error::Config("lasso lambda must be non-negative".into()))
            }
            _ => Ok(()),
        }
    }
}

fn code(d: &Mat, y: &Mat, coder: Coder) -> Result<Mat> {
    match coder {
        Coder::Omp { s } => Ok(omp_code(d, y, s)?.coefficients),
        Coder::Lasso {
            lambda,
            max_inner,
            tol,
        } => lasso_code(d, y, lambda, max_inner, tol),
    }
}

/// Initial dictionary: `k` distinct training columns drawn with the seed,
/// normalized.
pub fn init_dictionary(y: &Mat, k: usize, seed: u64) -> Result<Mat> {
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one atom".into()));
    }
    if k > y.cols() {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {k} distinct columns from {} samples",
            y.cols()
        )));
    }
    let mut r = rng::seeded(rng::derive_seed(seed, &[b"alt-init"]));
    let idx = sample(&mut r, y.cols(), k).into_vec();
    let mut d = y.select_cols(&idx);
    fill_and_normalize(&mut d, seed, b"alt-init-atom");
    Ok(d)
}

/// Alternates sparse coding and dictionary update for `outer_iters` rounds,
/// recording `‖Y − DX‖_F` after each round.
pub fn run_alternating(y: &Mat, k: usize, cfg: &AltConfig) -> Result<LearnedModel> {
    cfg.validate()?;
    let d = init_dictionary(y, k, cfg.seed)?;
    run_alternating_from(y, d, cfg)
}

/// As [`run_alternating`] from a given dictionary.
pub fn run_alternating_from(y: &Mat, mut d: Mat, cfg: &AltConfig) -> Result<LearnedModel> {
    cfg.validate()?;
    if d.rows() != y.rows() {
        return Err(Error::dim("dictionary and data row counts differ"));
    }
    let mut x = Mat::zeros(d.cols(), y.cols());
    let mut history = Vec::with_capacity(cfg.outer_iters);
    for it in 0..cfg.outer_iters {
        x = code(&d, y, cfg.coder)?;
        match cfg.updater {
            Updater::Mod => {
                let seed = rng::derive_seed(cfg.seed, &[b"mod", &(it as u64).to_le_bytes()]);
                d = mod_update(y, &x, seed)?;
            }
            Updater::Ksvd => {
                let (d1, x1) = ksvd_update(y, &d, &x)?;
                d = d1;
                x = x1;
            }
        }
        history.push(frob_norm(&(y - &d.matmul(&x)?)));
    }
    Ok(LearnedModel {
        dictionary: d,
        coefficients: x,
        dead_atoms: BTreeSet::new(),
        history: History::Alternating(history),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::normalize_columns;

    fn data(seed: u64) -> Mat {
        let mut r = rng::seeded(seed);
        let mut d = Mat::from_fn(6, 8, |_, _| rng::standard_normal(&mut r));
        normalize_columns(&mut d);
        let x = Mat::from_fn(8, 40, |_, _| {
            let v = rng::standard_normal(&mut r);
            if v.abs() > 1.0 { v } else { 0.0 }
        });
        d.matmul(&x).unwrap()
    }

    #[test]
    fn single_round_records_one_residual() {
        let y = data(1);
        for updater in [Updater::Mod, Updater::Ksvd] {
            let cfg = AltConfig::new(Coder::Omp { s: 2 }, updater, 1, 3).unwrap();
            let m = run_alternating(&y, 8, &cfg).unwrap();
            match &m.history {
                History::Alternating(h) => {
                    assert_eq!(h.len(), 1);
                    assert!(h[0].is_finite());
                }
                other => panic!("unexpected history {other:?}"),
            }
        }
    }

    #[test]
    fn same_seed_same_model() {
        let y = data(2);
        for coder in [
            Coder::Omp { s: 2 },
            Coder::Lasso {
                lambda: 0.05,
                max_inner: 200,
                tol: 1e-8,
            },
        ] {
            let cfg = AltConfig::new(coder, Updater::Ksvd, 5, 9).unwrap();
            assert_eq!(run_alternating(&y, 8, &cfg).unwrap(), run_alternating(&y, 8, &cfg).unwrap());
        }
    }

    #[test]
    fn ksvd_residual_is_non_increasing_with_omp() {
        let y = data(3);
        let cfg = AltConfig::new(Coder::Omp { s: 2 }, Updater::Ksvd, 10, 4).unwrap();
        let m = run_alternating(&y, 8, &cfg).unwrap();
        let History::Alternating(h) = &m.history else { unreachable!() };
        assert!(h.iter().all(|v| v.is_finite()));
        for j in 0..8 {
            let n: f64 = m.dictionary.col(j).iter().map(|v| v * v).sum();
            assert!((n - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn init_uses_distinct_columns() {
        let mut r = rng::seeded(4);
        let y = Mat::from_fn(6, 40, |_, _| rng::standard_normal(&mut r));
        let d = init_dictionary(&y, 8, 1).unwrap();
        for a in 0..8 {
            for b in a + 1..8 {
                assert_ne!(d.col(a), d.col(b));
            }
        }
        assert!(init_dictionary(&y, 41, 1).is_err());
        assert!(AltConfig::new(Coder::Omp { s: 2 }, Updater::Mod, 0, 0).is_err());
    }
}
