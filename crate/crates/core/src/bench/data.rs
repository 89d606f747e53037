use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::{frob_norm, normalize_columns, Mat};
use crate::rng;

/// How the support of each ground-truth coefficient column is drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SparsityModel {
    /// Exactly `S` non-zeros per column, positions uniform without replacement.
    Fixed(usize),
    /// Each entry non-zero independently with probability θ.
    Bernoulli(f64),
}

impl fmt::Display for SparsityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SparsityModel::Fixed(s) => write!(f, "fixed:{s}"),
            SparsityModel::Bernoulli(t) => write!(f, "bernoulli:{t:?}"),
        }
    }
}

impl FromStr for SparsityModel {
    type Err = Error;
    /// `fixed:3`, `bernoulli:0.125` or `bernoulli:6/48`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad sparsity model {s:?}"));
        let (kind, val) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "fixed" => Ok(SparsityModel::Fixed(val.trim().parse().map_err(|_| bad())?)),
            "bernoulli" => {
                let val = val.trim();
                let theta = match val.split_once('/') {
                    Some((p, q)) => {
                        let p: f64 = p.trim().parse().map_err(|_| bad())?;
                        let q: f64 = q.trim().parse().map_err(|_| bad())?;
                        p / q
                    }
                    None => val.parse().map_err(|_| bad())?,
                };
                Ok(SparsityModel::Bernoulli(theta))
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub d0: Mat,
    pub x0: Mat,
    pub y_clean: Mat,
    pub y_observed: Mat,
    pub snr_db: Option<f64>,
    /// `‖Y_observed − Y_clean‖_F`; zero for clean data.
    pub noise_norm: f64,
    pub sparsity: SparsityModel,
}

/// Gaussian dictionary with unit columns, Gaussian non-zeros on supports
/// drawn by `sparsity`, `Y = D⁰X⁰`. The observation equals the clean data;
/// see [`add_noise`].
pub fn gen_ground_truth(
    m: usize,
    k: usize,
    n: usize,
    sparsity: SparsityModel,
    seed: u64,
) -> Result<GroundTruth> {
    if m == 0 || k == 0 || n == 0 {
        return Err(Error::InvalidArgument("M, K and N must be positive".into()));
    }
    match sparsity {
        SparsityModel::Fixed(s) if s == 0 || s > k => {
            return Err(Error::InvalidArgument(format!(
                "sparsity S = {s} must lie in 1..={k}"
            )))
        }
        SparsityModel::Bernoulli(t) if !(t > 0.0 && t < 1.0) => {
            return Err(Error::InvalidArgument(format!(
                "Bernoulli probability {t} must lie in (0, 1)"
            )))
        }
        _ => {}
    }
    let mut r = rng::seeded(seed);
    let mut d0 = Mat::from_fn(m, k, |_, _| rng::standard_normal(&mut r));
    normalize_columns(&mut d0);
    let mut x0 = Mat::zeros(k, n);
    for j in 0..n {
        match sparsity {
            SparsityModel::Fixed(s) => {
                let mut idx = sample(&mut r, k, s).into_vec();
                idx.sort_unstable();
                for i in idx {
                    x0.set(i, j, rng::standard_normal(&mut r));
                }
            }
            SparsityModel::Bernoulli(theta) => {
                for i in 0..k {
                    if r.random::<f64>() < theta {
                        x0.set(i, j, rng::standard_normal(&mut r));
                    }
                }
            }
        }
    }
    let y_clean = d0.matmul(&x0)?;
    Ok(GroundTruth {
        d0,
        x0,
        y_observed: y_clean.clone(),
        y_clean,
        snr_db: None,
        noise_norm: 0.0,
        sparsity,
    })
}

impl GroundTruth {
    /// Replaces the observation with a noisy copy at the given SNR.
    pub fn with_noise(mut self, snr_db: f64, seed: u64) -> Result<Self> {
        let (y, eps) = add_noise(&self.y_clean, snr_db, seed)?;
        self.y_observed = y;
        self.noise_norm = eps;
        self.snr_db = Some(snr_db);
        Ok(self)
    }
}

/// Adds Gaussian noise scaled so that `10·log₁₀(‖Y‖²/‖E‖²) = snr_db` exactly.
/// Returns `(Y + E, ‖E‖_F)`.
pub fn add_noise(y: &Mat, snr_db: f64, seed: u64) -> Result<(Mat, f64)> {
    let y_norm = frob_norm(y);
    if y_norm == 0.0 {
        return Err(Error::InvalidArgument("cannot set an SNR for zero data".into()));
    }
    if !snr_db.is_finite() {
        return Err(Error::InvalidArgument(format!("SNR must be finite, got {snr_db}")));
    }
    let mut r = rng::seeded(seed);
    let e = Mat::from_fn(y.rows(), y.cols(), |_, _| rng::standard_normal(&mut r));
    let target = y_norm * 10f64.powf(-snr_db / 20.0);
    let e = e.scaled(target / frob_norm(&e));
    let eps = frob_norm(&e);
    Ok((y + &e, eps))
}

/// Dictionary recovery error: estimated atoms are matched greedily, in index
/// order, to the remaining ground-truth atom of largest absolute cosine;
/// the error is the mean of `1 − |cos|` over the matches.
pub fn recovery_error(d_hat: &Mat, d0: &Mat) -> Result<f64> {
    if d_hat.shape() != d0.shape() {
        return Err(Error::dim(format!(
            "estimated dictionary is {:?}, ground truth {:?}",
            d_hat.shape(),
            d0.shape()
        )));
    }
    let mut a = d_hat.clone();
    let mut b = d0.clone();
    normalize_columns(&mut a);
    normalize_columns(&mut b);
    let corr = a.tr_matmul(&b)?;
    let k = d0.cols();
    let mut used = vec![false; k];
    let mut total = 0.0;
    for row in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for (i, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let c = corr.get(row, i).abs();
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((i, c));
            }
        }
        let (i, c) = best.expect("one unused atom per estimated atom");
        used[i] = true;
        total += 1.0 - c.min(1.0);
    }
    Ok((total / k as f64).clamp(0.0, 1.0))
}
