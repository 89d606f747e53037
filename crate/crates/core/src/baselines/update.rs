use crate::error::{Error, Result};
use crate::linalg::{leading_singular_triple, solve_spd_right, Mat};
use crate::rng;

/// Ridge on `XXᵀ` in the MOD update.
pub const MOD_RIDGE: f64 = 1e-12;

/// Method of optimal directions: `D = YXᵀ(XXᵀ + 1e-12·I)⁻¹`, columns scaled
/// to unit norm; zero columns become seeded random unit vectors.
pub fn mod_update(y: &Mat, x: &Mat, seed: u64) -> Result<Mat> {
    if y.cols() != x.cols() {
        return Err(Error::dim(format!(
            "data has {} columns, coefficients {}",
            y.cols(),
            x.cols()
        )));
    }
    let k = x.rows();
    let yxt = y.matmul(&x.t())?;
    let mut gram = x.matmul(&x.t())?;
    for i in 0..k {
        gram.set(i, i, gram.get(i, i) + MOD_RIDGE);
    }
    let mut d = solve_spd_right(&yxt, &gram)?;
    fill_and_normalize(&mut d, seed, b"mod-atom");
    Ok(d)
}

/// Normalizes columns, replacing zero columns by seeded unit vectors.
pub(crate) fn fill_and_normalize(d: &mut Mat, seed: u64, tag: &[u8]) {
    let m = d.rows();
    for j in 0..d.cols() {
        let col = d.col_mut(j);
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            col.iter_mut().for_each(|v| *v /= norm);
        } else {
            let mut r = rng::seeded(rng::derive_seed(seed, &[tag, &(j as u64).to_le_bytes()]));
            col.copy_from_slice(&rng::unit_vector(&mut r, m));
        }
    }
}

/// One K-SVD sweep in ascending atom order. Each atom with a non-empty
/// support `Ω` is replaced by the leading singular pair of the residual
/// restricted to `Ω`; the zero pattern of `X` is kept.
pub fn ksvd_update(y: &Mat, d: &Mat, x: &Mat) -> Result<(Mat, Mat)> {
    let (m, n) = y.shape();
    let k = d.cols();
    if d.rows() != m || x.rows() != k || x.cols() != n {
        return Err(Error::dim(format!(
            "Y {:?}, D {:?}, X {:?} are incompatible",
            y.shape(),
            d.shape(),
            x.shape()
        )));
    }
    let mut d = d.clone();
    let mut x = x.clone();
    let mut resid = y - &d.matmul(&x)?;
    for j in 0..k {
        let omega: Vec<usize> = (0..n).filter(|&c| x.get(j, c) != 0.0).collect();
        if omega.is_empty() {
            continue;
        }
        // E_Ω = residual with atom j's contribution restored
        let mut e = resid.select_cols(&omega);
        for (c, &col) in omega.iter().enumerate() {
            let coef = x.get(j, col);
            for i in 0..m {
                e.set(i, c, e.get(i, c) + d.get(i, j) * coef);
            }
        }
        match leading_singular_triple(&e).map_err(|err| err.at_atom(j))? {
            Some((sigma, u, v)) => {
                d.col_mut(j).copy_from_slice(&u);
                for (c, &col) in omega.iter().enumerate() {
                    x.set(j, col, sigma * v[c]);
                }
            }
            None => {
                for &col in &omega {
                    x.set(j, col, 0.0);
                }
            }
        }
        for (c, &col) in omega.iter().enumerate() {
            let coef = x.get(j, col);
            for i in 0..m {
                resid.set(i, col, e.get(i, c) - d.get(i, j) * coef);
            }
        }
    }
    Ok((d, x))
}
