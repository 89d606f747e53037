//! Dense matrices and the handful of matrix operators every solver step needs.
//!
//! [`Mat`] wraps a column-major `nalgebra::DMatrix<f64>`. Columns are the unit
//! of work throughout the crate (training samples, patches, atoms), so
//! column slices are exposed directly.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

const SVD_MAX_SWEEPS: usize = 10_000;

/// Dense real matrix, column-major, finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat(DMatrix<f64>);

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Mat(DMatrix::identity(n, n))
    }

    /// Build from column-major data. Rejects wrong lengths and non-finite entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim(format!(
                "{} values supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_vec(rows, cols, data))
    }

    /// Build from a list of rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::dim("ragged rows"));
        }
        Self::from_dmatrix(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }

    pub fn from_dmatrix(m: DMatrix<f64>) -> Result<Self> {
        let (rows, _) = m.shape();
        if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos % rows.max(1),
                col: pos / rows.max(1),
            });
        }
        Ok(Mat(m))
    }

    /// Entries are computed by `f(row, col)`; the caller guarantees finiteness.
    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        let m = DMatrix::from_fn(rows, cols, f);
        debug_assert!(m.iter().all(|v| v.is_finite()));
        Mat(m)
    }

    /// Matrix whose columns are the given slices.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::dim("column length differs from row count"));
        }
        let data: Vec<f64> = columns.iter().flatten().copied().collect();
        Self::from_col_major(rows, columns.len(), data)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0[(i, j)] = v;
    }

    /// Column-major storage.
    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        self.0.as_mut_slice()
    }

    pub fn col(&self, j: usize) -> &[f64] {
        let m = self.rows();
        &self.0.as_slice()[j * m..(j + 1) * m]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        let m = self.rows();
        &mut self.0.as_mut_slice()[j * m..(j + 1) * m]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols()).map(|j| self.0[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows()).map(|i| self.row(i)).collect()
    }

    pub fn inner(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn t(&self) -> Mat {
        Mat(self.0.transpose())
    }

    pub fn matmul(&self, rhs: &Mat) -> Result<Mat> {
        if self.cols() != rhs.rows() {
            return Err(Error::dim(format!(
                "cannot multiply {:?} by {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        Ok(Mat(&self.0 * &rhs.0))
    }

    /// `selfᵀ · rhs` without forming the transpose.
    pub fn tr_matmul(&self, rhs: &Mat) -> Result<Mat> {
        if self.rows() != rhs.rows() {
            return Err(Error::dim(format!(
                "cannot multiply transpose of {:?} by {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        Ok(Mat(self.0.tr_mul(&rhs.0)))
    }

    pub fn scaled(&self, s: f64) -> Mat {
        Mat(&self.0 * s)
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: f64, other: &Mat) {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in add_scaled");
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += s * b;
        }
    }

    pub fn frob_norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn same_shape(&self, other: &Mat) -> bool {
        self.shape() == other.shape()
    }

    /// Rows `start..start+len` as a new matrix.
    pub fn row_block(&self, start: usize, len: usize) -> Mat {
        Mat(self.0.rows(start, len).into_owned())
    }

    /// Selected columns as a new matrix.
    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        Mat(self.0.select_columns(idx))
    }

    /// Stack `top` over `bottom`.
    pub fn vstack(top: &Mat, bottom: &Mat) -> Result<Mat> {
        if top.cols() != bottom.cols() {
            return Err(Error::dim("vstack needs equal column counts"));
        }
        let (m1, m2, n) = (top.rows(), bottom.rows(), top.cols());
        Ok(Mat::from_fn(m1 + m2, n, |i, j| {
            if i < m1 {
                top.get(i, j)
            } else {
                bottom.get(i - m1, j)
            }
        }))
    }

    /// Concatenate columns of matrices with equal row counts.
    pub fn hstack(parts: &[Mat]) -> Result<Mat> {
        let rows = parts.first().map_or(0, Mat::rows);
        if parts.iter().any(|p| p.rows() != rows) {
            return Err(Error::dim("hstack needs equal row counts"));
        }
        let data: Vec<f64> = parts.iter().flat_map(|p| p.as_slice().iter().copied()).collect();
        let cols = parts.iter().map(Mat::cols).sum();
        Ok(Mat(DMatrix::from_vec(rows, cols, data)))
    }
}

impl From<Mat> for DMatrix<f64> {
    fn from(m: Mat) -> Self {
        m.0
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Mat> for &Mat {
            type Output = Mat;
            fn $method(self, rhs: &Mat) -> Mat {
                assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
                Mat(&self.0 $op &rhs.0)
            }
        }
        impl $trait<Mat> for Mat {
            type Output = Mat;
            fn $method(self, rhs: Mat) -> Mat {
                assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
                Mat(self.0 $op rhs.0)
            }
        }
        impl $trait<&Mat> for Mat {
            type Output = Mat;
            fn $method(self, rhs: &Mat) -> Mat {
                assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
                Mat(self.0 $op &rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);

impl AddAssign<&Mat> for Mat {
    fn add_assign(&mut self, rhs: &Mat) {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Mat> for Mat {
    fn sub_assign(&mut self, rhs: &Mat) {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
        self.0 -= &rhs.0;
    }
}

impl Mul<f64> for &Mat {
    type Output = Mat;
    fn mul(self, s: f64) -> Mat {
        Mat(&self.0 * s)
    }
}

impl Mul<f64> for Mat {
    type Output = Mat;
    fn mul(self, s: f64) -> Mat {
        Mat(self.0 * s)
    }
}

impl Neg for Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        Mat(-self.0)
    }
}

/// Thin SVD `a = u · diag(s) · vt` with `s` sorted descending.
#[derive(Clone, Debug)]
pub struct SvdThin {
    pub u: Mat,
    pub s: Vec<f64>,
    pub vt: Mat,
}

impl SvdThin {
    pub fn reconstruct(&self) -> Mat {
        let mut us = self.u.clone();
        for (j, &sigma) in self.s.iter().enumerate() {
            for v in us.col_mut(j) {
                *v *= sigma;
            }
        }
        Mat(&us.0 * &self.vt.0)
    }
}

pub fn frob_norm(a: &Mat) -> f64 {
    a.frob_norm_sq().sqrt()
}

pub fn l21_norm(a: &Mat) -> f64 {
    (0..a.cols())
        .map(|j| a.col(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .sum()
}

pub fn svd_thin(a: &Mat) -> Result<SvdThin> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::dim("SVD of an empty matrix"));
    }
    let svd = a
        .0
        .clone()
        .try_svd(true, true, f64::EPSILON, SVD_MAX_SWEEPS)
        .ok_or(Error::SvdFailure { atom: None })?;
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::SvdFailure { atom: None }),
    };
    let r = svd.singular_values.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = DMatrix::from_fn(m, r, |i, j| u[(i, order[j])]);
    let vt = DMatrix::from_fn(r, n, |i, j| vt[(order[i], j)]);
    Ok(SvdThin {
        u: Mat(u),
        s,
        vt: Mat(vt),
    })
}

/// Leading singular triple `(σ₁, u₁, v₁)` via the eigen-decomposition of the
/// smaller Gram matrix. Returns `None` for the zero matrix.
pub fn leading_singular_triple(a: &Mat) -> Result<Option<(f64, Vec<f64>, Vec<f64>)>> {
    if a.is_zero() {
        return Ok(None);
    }
    let (m, n) = a.shape();
    let wide = m <= n;
    let gram = if wide { outer_gram(a) } else { a.0.tr_mul(&a.0) };
    let eig = SymmetricEigen::try_new(gram, f64::EPSILON, SVD_MAX_SWEEPS)
        .ok_or(Error::SvdFailure { atom: None })?;
    let top = (0..eig.eigenvalues.len())
        .max_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]))
        .expect("non-empty spectrum");
    let x: DVector<f64> = eig.eigenvectors.column(top).into_owned();
    // w = Aᵀu (wide) or Av (tall); its norm is σ₁
    let w = if wide { a.0.tr_mul(&x) } else { &a.0 * &x };
    let sigma = w.norm();
    if sigma == 0.0 {
        return Ok(None);
    }
    let w = w / sigma;
    let (u, v) = if wide {
        (x.as_slice().to_vec(), w.as_slice().to_vec())
    } else {
        (w.as_slice().to_vec(), x.as_slice().to_vec())
    };
    Ok(Some((sigma, u, v)))
}

/// `AAᵀ` accumulated column by column, without materializing `Aᵀ`.
fn outer_gram(a: &Mat) -> DMatrix<f64> {
    let m = a.rows();
    let mut g = DMatrix::<f64>::zeros(m, m);
    let gs = g.as_mut_slice();
    for j in 0..a.cols() {
        let c = a.col(j);
        for (q, &cq) in c.iter().enumerate() {
            if cq == 0.0 {
                continue;
            }
            let col = &mut gs[q * m..q * m + q + 1];
            col.iter_mut().zip(&c[..=q]).for_each(|(g, &cp)| *g += cp * cq);
        }
    }
    for q in 0..m {
        for p in 0..q {
            gs[p * m + q] = gs[q * m + p];
        }
    }
    g
}

/// Best rank-one approximation `σ₁ u₁ v₁ᵀ` in Frobenius norm.
///
/// At a singular-value tie the projection is set-valued; whichever maximising
/// triple the eigen-solver returns is used.
pub fn rank_one_project(a: &Mat) -> Result<Mat> {
    let mut out = a.clone();
    rank_one_project_in_place(&mut out)?;
    Ok(out)
}

/// [`rank_one_project`] overwriting its argument.
pub fn rank_one_project_in_place(a: &mut Mat) -> Result<()> {
    match leading_singular_triple(a)? {
        None => a.as_mut_slice().fill(0.0),
        Some((sigma, u, v)) => {
            for (j, vj) in v.iter().enumerate() {
                let s = sigma * vj;
                a.col_mut(j).iter_mut().zip(&u).for_each(|(x, ui)| *x = s * ui);
            }
        }
    }
    Ok(())
}

/// Column-wise shrinkage `(1 − t/‖c‖₂)₊ · c`, the proximal map of `t‖·‖₂,₁`.
pub fn group_soft_threshold(a: &Mat, t: f64) -> Mat {
    let mut out = a.clone();
    group_soft_threshold_in_place(&mut out, t);
    out
}

/// [`group_soft_threshold`] overwriting its argument.
pub fn group_soft_threshold_in_place(a: &mut Mat, t: f64) {
    for j in 0..a.cols() {
        let col = a.col_mut(j);
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = if norm > t { 1.0 - t / norm } else { 0.0 };
        col.iter_mut().for_each(|v| *v *= scale);
    }
}

/// Sum of singular values.
pub fn nuclear_norm(a: &Mat) -> Result<f64> {
    Ok(svd_thin(a)?.s.iter().sum())
}

/// Cheap numerical rank test: the residual after projecting every column onto
/// the dominant column bounds σ₂ from above, so a relative residual below
/// `rel_tol` certifies `σ₂ ≤ rel_tol · ‖a‖_F`.
pub fn is_rank_at_most_one(a: &Mat, rel_tol: f64) -> bool {
    let total = frob_norm(a);
    if total == 0.0 {
        return true;
    }
    let (best, _) = (0..a.cols())
        .map(|j| (j, a.col(j).iter().map(|v| v * v).sum::<f64>()))
        .fold((0, -1.0), |acc, (j, n)| if n > acc.1 { (j, n) } else { acc });
    let c = a.col(best);
    let cc: f64 = c.iter().map(|v| v * v).sum();
    let mut resid = 0.0;
    for j in 0..a.cols() {
        let col = a.col(j);
        let coef = col.iter().zip(c).map(|(x, y)| x * y).sum::<f64>() / cc;
        resid += col
            .iter()
            .zip(c)
            .map(|(x, y)| (x - coef * y).powi(2))
            .sum::<f64>();
    }
    resid.sqrt() <= rel_tol * total
}

/// Scale every column to unit ℓ2 norm; returns the original norms.
/// Zero columns are left untouched and report norm 0.
pub fn normalize_columns(a: &mut Mat) -> Vec<f64> {
    (0..a.cols())
        .map(|j| {
            let col = a.col_mut(j);
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                col.iter_mut().for_each(|v| *v /= norm);
            }
            norm
        })
        .collect()
}

/// Solve `x · g = b` for `x` with `g` symmetric positive definite (`b` is r×k, `g` k×k).
pub(crate) fn solve_spd_right(b: &Mat, g: &Mat) -> Result<Mat> {
    let chol = g
        .0
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("matrix is not positive definite".into()))?;
    // x g = b  <=>  g xᵀ = bᵀ
    let xt = chol.solve(&b.0.transpose());
    Ok(Mat(xt.transpose()))
}
