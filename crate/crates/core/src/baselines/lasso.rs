use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rng;

/// Largest eigenvalue of `DᵀD` by power iteration, stopped at relative
/// change `1e-8`.
pub fn lipschitz_constant(d: &Mat) -> Result<f64> {
    let g = d.tr_matmul(d)?;
    let k = g.rows();
    let mut r = rng::seeded(0x11f5);
    let mut v = rng::unit_vector(&mut r, k);
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let w: Vec<f64> = (0..k)
            .map(|i| (0..k).map(|j| g.get(i, j) * v[j]).sum())
            .collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let next = norm;
        v = w.into_iter().map(|x| x / norm).collect();
        if (next - lambda).abs() <= 1e-8 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    Ok(lambda)
}

fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Per-column lasso solver state shared across columns.
struct Problem<'a> {
    d: &'a Mat,
    gram: Mat,
    step: f64,
    max_inner: usize,
    tol: f64,
}

impl Problem<'_> {
    fn objective(&self, y: &[f64], x: &[f64], lambda: f64) -> f64 {
        let (m, k) = self.d.shape();
        let mut fit = 0.0;
        for i in 0..m {
            let mut r = y[i];
            for (j, xj) in x.iter().enumerate().take(k) {
                if *xj != 0.0 {
                    r -= self.d.get(i, j) * xj;
                }
            }
            fit += r * r;
        }
        0.5 * fit + lambda * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Proximal gradient step from `z`; `dty` is `Dᵀy`.
    fn prox_step(&self, z: &[f64], dty: &[f64], lambda: f64) -> Vec<f64> {
        let k = z.len();
        (0..k)
            .map(|i| {
                let grad: f64 = (0..k).map(|j| self.gram.get(i, j) * z[j]).sum::<f64>() - dty[i];
                soft(z[i] - self.step * grad, self.step * lambda)
            })
            .collect()
    }

    /// Monotone FISTA: an accelerated step that raises the objective is
    /// replaced by a plain proximal step from the last iterate and the
    /// momentum is reset.
    fn solve(&self, y: &[f64], lambda: f64) -> (Vec<f64>, Vec<f64>) {
        let k = self.d.cols();
        let dty: Vec<f64> = (0..k)
            .map(|j| self.d.col(j).iter().zip(y).map(|(a, b)| a * b).sum())
            .collect();
        let mut x = vec![0.0; k];
        let mut f = self.objective(y, &x, lambda);
        let mut trace = vec![f];
        if self.step == 0.0 {
            return (x, trace);
        }
        let mut z = x.clone();
        let mut t = 1.0_f64;
        for _ in 0..self.max_inner {
            let mut cand = self.prox_step(&z, &dty, lambda);
            let mut fc = self.objective(y, &cand, lambda);
            let mut restarted = false;
            if fc > f {
                cand = self.prox_step(&x, &dty, lambda);
                fc = self.objective(y, &cand, lambda);
                restarted = true;
            }
            if fc > f {
                // numerical floor: no descent possible
                break;
            }
            let t_next = if restarted { 1.0 } else { 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt()) };
            let beta = if restarted { 0.0 } else { (t - 1.0) / t_next };
            z = cand.iter().zip(&x).map(|(c, p)| c + beta * (c - p)).collect();
            t = t_next;
            let change = (f - fc).abs() / f.abs().max(f64::MIN_POSITIVE);
            x = cand;
            f = fc;
            trace.push(f);
            if change < self.tol {
                break;
            }
        }
        (x, trace)
    }
}

fn problem<'a>(d: &'a Mat, max_inner: usize, tol: f64) -> Result<Problem<'a>> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument("lasso tolerance must be non-negative".into()));
    }
    let l = lipschitz_constant(d)?;
    // power iteration approaches L from below; a hair of slack keeps 1/L a
    // valid step
    let step = if l > 0.0 { 1.0 / (l * (1.0 + 1e-6)) } else { 0.0 };
    Ok(Problem {
        d,
        gram: d.tr_matmul(d)?,
        step,
        max_inner,
        tol,
    })
}

/// Approximate minimizer of `½‖Y − DX‖² + λΣ|Xᵢⱼ|` by accelerated proximal
/// gradient with step `1/L`, column by column.
pub fn lasso_code(d: &Mat, y: &Mat, lambda: f64, max_inner: usize, tol: f64) -> Result<Mat> {
    lasso_code_columns(d, y, &vec![lambda; y.cols()], max_inner, tol)
}

/// As [`lasso_code`] with one `λ` per column.
pub fn lasso_code_columns(
    d: &Mat,
    y: &Mat,
    lambdas: &[f64],
    max_inner: usize,
    tol: f64,
) -> Result<Mat> {
    if d.rows() != y.rows() {
        return Err(Error::dim("dictionary and data row counts differ"));
    }
    if lambdas.len() != y.cols() {
        return Err(Error::dim("one lambda per column required"));
    }
    if lambdas.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
        return Err(Error::InvalidArgument("lambda must be non-negative".into()));
    }
    let p = problem(d, max_inner, tol)?;
    let cols: Vec<Vec<f64>> = (0..y.cols())
        .into_par_iter()
        .map(|j| p.solve(y.col(j), lambdas[j]).0)
        .collect();
    let mut x = Mat::zeros(d.cols(), y.cols());
    for (j, c) in cols.iter().enumerate() {
        x.col_mut(j).copy_from_slice(c);
    }
    Ok(x)
}

/// Objective values of every accepted iterate for one column.
pub fn lasso_trace(d: &Mat, y_col: &[f64], lambda: f64, max_inner: usize, tol: f64) -> Result<Vec<f64>> {
    if y_col.len() != d.rows() {
        return Err(Error::dim("column length differs from dictionary rows"));
    }
    Ok(problem(d, max_inner, tol)?.solve(y_col, lambda).1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::normalize_columns;

    fn rand_mat(seed: u64, m: usize, n: usize) -> Mat {
        let mut r = rng::seeded(seed);
        Mat::from_fn(m, n, |_, _| rng::standard_normal(&mut r))
    }

    fn objective(d: &Mat, y: &Mat, x: &Mat, lambda: f64) -> f64 {
        let r = y - &d.matmul(x).unwrap();
        0.5 * r.frob_norm_sq() + lambda * x.as_slice().iter().map(|v| v.abs()).sum::<f64>()
    }

    #[test]
    fn large_lambda_gives_zero() {
        let mut d = rand_mat(1, 5, 7);
        normalize_columns(&mut d);
        let y = rand_mat(2, 5, 3);
        let lmax = d.tr_matmul(&y).unwrap().max_abs();
        let x = lasso_code(&d, &y, lmax, 500, 1e-12).unwrap();
        assert!(x.is_zero());
    }

    #[test]
    fn orthonormal_dictionary_is_soft_thresholding() {
        let q = crate::linalg::svd_thin(&rand_mat(3, 6, 6)).unwrap().u;
        let y = rand_mat(4, 6, 4);
        let lambda = 0.3;
        let x = lasso_code(&q, &y, lambda, 1000, 1e-15).unwrap();
        let qty = q.tr_matmul(&y).unwrap();
        for i in 0..6 {
            for j in 0..4 {
                assert!((x.get(i, j) - soft(qty.get(i, j), lambda)).abs() < 1e-8);
            }
        }
    }

    fn coordinate_descent(d: &Mat, y: &[f64], lambda: f64) -> Vec<f64> {
        let k = d.cols();
        let mut x = vec![0.0; k];
        let norms: Vec<f64> = (0..k).map(|j| d.col(j).iter().map(|v| v * v).sum()).collect();
        let mut r: Vec<f64> = y.to_vec();
        for _ in 0..20_000 {
            for j in 0..k {
                let c: f64 = d.col(j).iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() + norms[j] * x[j];
                let new = soft(c, lambda) / norms[j];
                let delta = new - x[j];
                if delta != 0.0 {
                    for (ri, di) in r.iter_mut().zip(d.col(j)) {
                        *ri -= delta * di;
                    }
                    x[j] = new;
                }
            }
        }
        x
    }

    #[test]
    fn matches_coordinate_descent_oracle() {
        for seed in 0..10 {
            let mut d = rand_mat(10 + seed, 6, 9);
            normalize_columns(&mut d);
            let y = rand_mat(30 + seed, 6, 1);
            let lambda = 0.2;
            let x = lasso_code(&d, &y, lambda, 20_000, 1e-14).unwrap();
            let cd = Mat::from_col_major(9, 1, coordinate_descent(&d, y.col(0), lambda)).unwrap();
            let (a, b) = (objective(&d, &y, &x, lambda), objective(&d, &y, &cd, lambda));
            assert!((a - b).abs() < 1e-4, "fista {a} vs cd {b}");
        }
    }

    #[test]
    fn objective_never_increases() {
        for seed in 0..20 {
            let mut d = rand_mat(50 + seed, 8, 16);
            normalize_columns(&mut d);
            let y = rand_mat(70 + seed, 8, 1);
            let trace = lasso_trace(&d, y.col(0), 0.05, 2000, 0.0).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-10, "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn power_iteration_matches_eigenvalue() {
        let d = rand_mat(90, 5, 8);
        let g = d.tr_matmul(&d).unwrap().into_inner();
        let top = g.symmetric_eigenvalues().max();
        let l = lipschitz_constant(&d).unwrap();
        assert!((l - top).abs() <= 1e-6 * top);
    }

    #[test]
    fn per_column_lambdas_and_validation() {
        let mut d = rand_mat(91, 4, 6);
        normalize_columns(&mut d);
        let y = rand_mat(92, 4, 2);
        let big = d.tr_matmul(&y).unwrap().max_abs();
        let x = lasso_code_columns(&d, &y, &[big, 0.01], 500, 1e-12).unwrap();
        assert!(x.col(0).iter().all(|v| *v == 0.0));
        assert!(x.col(1).iter().any(|v| *v != 0.0));
        assert!(lasso_code_columns(&d, &y, &[0.1], 10, 1e-6).is_err());
        assert!(lasso_code(&d, &y, -1.0, 10, 1e-6).is_err());
    }
}
