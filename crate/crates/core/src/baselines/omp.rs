use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Residual norm below which pursuit stops early.
pub const OMP_RESIDUAL_TOL: f64 = 1e-10;
/// Ridge added to a singular restricted Gram matrix.
pub const OMP_RIDGE: f64 = 1e-12;

/// Result of coding one column.
#[derive(Clone, Debug, PartialEq)]
pub struct OmpColumn {
    /// Selected atoms in selection order.
    pub support: Vec<usize>,
    /// Coefficients aligned with `support`.
    pub coeffs: Vec<f64>,
    /// Set when the least-squares refit needed the ridge.
    pub regularized: bool,
}

/// Sparse codes for a whole data matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseCode {
    pub coefficients: Mat,
    /// Non-zero rows of each column, ascending.
    pub support: Vec<Vec<usize>>,
    pub regularized: bool,
}

/// Orthogonal matching pursuit with budget `s`: repeatedly adds the atom
/// most correlated with the residual (lowest index on ties, never twice) and
/// refits all selected coefficients by least squares.
pub fn omp(d: &Mat, y_col: &[f64], s: usize) -> Result<OmpColumn> {
    let (m, k) = d.shape();
    if y_col.len() != m {
        return Err(Error::dim(format!("column has {} entries, dictionary {m} rows", y_col.len())));
    }
    if s > m || s > k {
        return Err(Error::InvalidArgument(format!(
            "sparsity {s} exceeds min(M, K) = {}",
            m.min(k)
        )));
    }
    let dm = d.inner();
    let y = DVector::from_column_slice(y_col);
    let mut residual = y.clone();
    let mut support: Vec<usize> = Vec::with_capacity(s);
    let mut coeffs: Vec<f64> = Vec::new();
    let mut regularized = false;
    while support.len() < s && residual.norm() >= OMP_RESIDUAL_TOL {
        let corr = dm.tr_mul(&residual);
        let mut best: Option<(usize, f64)> = None;
        for (j, c) in corr.iter().enumerate() {
            if support.contains(&j) {
                continue;
            }
            if best.is_none_or(|(_, b)| c.abs() > b) {
                best = Some((j, c.abs()));
            }
        }
        let Some((j, _)) = best else { break };
        support.push(j);
        let sub = DMatrix::from_fn(m, support.len(), |i, c| dm[(i, support[c])]);
        let gram = sub.tr_mul(&sub);
        let rhs = sub.tr_mul(&y);
        let x = match gram.clone().cholesky() {
            Some(ch) if well_conditioned(&gram) => ch.solve(&rhs),
            _ => {
                regularized = true;
                let ridge = gram + DMatrix::identity(support.len(), support.len()) * OMP_RIDGE;
                ridge
                    .cholesky()
                    .ok_or_else(|| Error::InvalidArgument("restricted Gram matrix is not PSD".into()))?
                    .solve(&rhs)
            }
        };
        residual = &y - &sub * &x;
        coeffs = x.iter().copied().collect();
    }
    Ok(OmpColumn {
        support,
        coeffs,
        regularized,
    })
}

fn well_conditioned(gram: &DMatrix<f64>) -> bool {
    let eig = gram.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    lo > 1e-14 * hi.max(1.0)
}

/// Codes every column of `y` with [`omp`], in parallel over columns.
pub fn omp_code(d: &Mat, y: &Mat, s: usize) -> Result<SparseCode> {
    if d.rows() != y.rows() {
        return Err(Error::dim("dictionary and data row counts differ"));
    }
    let cols = (0..y.cols())
        .into_par_iter()
        .map(|j| omp(d, y.col(j), s))
        .collect::<Result<Vec<_>>>()?;
    let mut coefficients = Mat::zeros(d.cols(), y.cols());
    let mut support = Vec::with_capacity(cols.len());
    let mut regularized = false;
    for (j, c) in cols.into_iter().enumerate() {
        regularized |= c.regularized;
        let mut idx = Vec::new();
        for (&i, &v) in c.support.iter().zip(&c.coeffs) {
            if v != 0.0 {
                coefficients.set(i, j, v);
                idx.push(i);
            }
        }
        idx.sort_unstable();
        support.push(idx);
    }
    Ok(SparseCode {
        coefficients,
        support,
        regularized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::normalize_columns;
    use crate::rng;

    fn random_dict(seed: u64, m: usize, k: usize) -> Mat {
        let mut r = rng::seeded(seed);
        let mut d = Mat::from_fn(m, k, |_, _| rng::standard_normal(&mut r));
        normalize_columns(&mut d);
        d
    }

    #[test]
    fn exact_atom_is_found() {
        let d = random_dict(1, 8, 10);
        let y: Vec<f64> = d.col(5).iter().map(|v| 2.0 * v).collect();
        let c = omp(&d, &y, 1).unwrap();
        assert_eq!(c.support, vec![5]);
        assert!((c.coeffs[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_column_has_empty_support() {
        let d = random_dict(2, 4, 6);
        let c = omp(&d, &[0.0; 4], 3).unwrap();
        assert!(c.support.is_empty());
        let code = omp_code(&d, &Mat::zeros(4, 3), 2).unwrap();
        assert!(code.coefficients.is_zero());
        assert!(code.support.iter().all(Vec::is_empty));
    }

    /// Tropp's exact recovery condition `max_{j∉S} ‖D_S⁺ d_j‖₁ < 1`.
    fn erc_holds(d: &Mat, support: &[usize]) -> bool {
        let sub = d.select_cols(support);
        let pinv = sub.inner().clone().pseudo_inverse(1e-12).unwrap();
        (0..d.cols())
            .filter(|j| !support.contains(j))
            .all(|j| (&pinv * DVector::from_column_slice(d.col(j))).lp_norm(1) < 1.0)
    }

    #[test]
    fn recovers_support_when_exact_recovery_condition_holds() {
        let (m, k, s) = (8, 16, 3);
        let mut checked = 0;
        for seed in 0..40_000 {
            if checked == 20 {
                break;
            }
            let d = random_dict(100 + seed, m, k);
            let mut r = rng::seeded(seed);
            let mut idx = rand::seq::index::sample(&mut r, k, s).into_vec();
            idx.sort_unstable();
            if !erc_holds(&d, &idx) {
                continue;
            }
            checked += 1;
            let mut y = vec![0.0; m];
            for &i in &idx {
                let a = rng::standard_normal(&mut r);
                for (yy, dv) in y.iter_mut().zip(d.col(i)) {
                    *yy += a * dv;
                }
            }
            let c = omp(&d, &y, s).unwrap();
            let mut got = c.support.clone();
            got.sort_unstable();
            assert_eq!(got, idx, "seed {seed}");
        }
        assert!(checked == 20, "only {checked} instances satisfied the condition");
    }

    #[test]
    fn never_selects_an_atom_twice() {
        let d = random_dict(4, 6, 9);
        let mut r = rng::seeded(5);
        for _ in 0..100 {
            let y: Vec<f64> = (0..6).map(|_| rng::standard_normal(&mut r)).collect();
            let c = omp(&d, &y, 6).unwrap();
            let mut s = c.support.clone();
            s.sort_unstable();
            s.dedup();
            assert_eq!(s.len(), c.support.len());
        }
    }

    #[test]
    fn duplicated_atoms_trigger_the_ridge_or_tie_rule() {
        let base = random_dict(6, 4, 2);
        let d = Mat::hstack(&[base.clone(), base]).unwrap();
        let y: Vec<f64> = d.col(0).iter().zip(d.col(1)).map(|(a, b)| a + 0.5 * b).collect();
        let c = omp(&d, &y, 3).unwrap();
        // ties go to the lowest index, so atom 2 (a copy of 0) is never preferred
        assert_eq!(c.support[0], 0);
        assert!(c.support.len() <= 3);
    }

    #[test]
    fn budget_checks() {
        let d = random_dict(7, 3, 5);
        assert!(omp(&d, &[1.0, 0.0, 0.0], 4).is_err());
        assert!(omp(&d, &[1.0, 0.0], 1).is_err());
    }

    #[test]
    fn parallel_code_matches_serial() {
        let d = random_dict(8, 8, 12);
        let mut r = rng::seeded(9);
        let y = Mat::from_fn(8, 20, |_, _| rng::standard_normal(&mut r));
        let code = omp_code(&d, &y, 3).unwrap();
        for j in 0..20 {
            let c = omp(&d, y.col(j), 3).unwrap();
            for (&i, &v) in c.support.iter().zip(&c.coeffs) {
                assert_eq!(code.coefficients.get(i, j), v);
            }
            assert!(code.support[j].len() <= 3);
        }
    }
}
