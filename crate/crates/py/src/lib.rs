//! Python module `road_py`: dictionary learning, the synthetic benchmark
//! and patch-based super-resolution. Matrices and images cross the
//! boundary as lists of rows.

mod convert;

use std::path::PathBuf;

use pyo3::prelude::*;
use road_core::bench::{self, ExperimentResult, SparsityModel};
use road_core::learner::{self, Algorithm, LearnerParams};
use road_core::superres::{self, SrCoder, SrConfig, SrMode};
use road_core::{linalg, History, LearnedModel};

use crate::convert::{err, image_from_rows, image_rows, mat_from_rows, rows_of, triple};

type Rows = Vec<Vec<f64>>;

/// Dictionary, coefficients and convergence trace of one learner run.
#[pyclass(name = "LearnedModel", module = "road_py", frozen)]
struct PyLearnedModel {
    inner: LearnedModel,
}

#[pymethods]
impl PyLearnedModel {
    #[getter]
    fn dictionary(&self) -> Rows {
        rows_of(&self.inner.dictionary)
    }

    #[getter]
    fn coefficients(&self) -> Rows {
        rows_of(&self.inner.coefficients)
    }

    #[getter]
    fn dead_atoms(&self) -> Vec<usize> {
        self.inner.dead_atoms.iter().copied().collect()
    }

    /// True when an ADMM run met both residual tolerances.
    #[getter]
    fn converged(&self) -> bool {
        matches!(&self.inner.history, History::Admm(r) if r.converged)
    }

    #[getter]
    fn iterations(&self) -> usize {
        match &self.inner.history {
            History::Admm(r) => r.iterations,
            History::Alternating(obj) => obj.len(),
        }
    }

    #[getter]
    fn primal_residuals(&self) -> Vec<f64> {
        match &self.inner.history {
            History::Admm(r) => r.primal_residual_history.clone(),
            History::Alternating(_) => Vec::new(),
        }
    }

    #[getter]
    fn dual_residuals(&self) -> Vec<f64> {
        match &self.inner.history {
            History::Admm(r) => r.dual_residual_history.clone(),
            History::Alternating(_) => Vec::new(),
        }
    }

    /// Inexact ADMM only.
    #[getter]
    fn lagrangian(&self) -> Vec<f64> {
        match &self.inner.history {
            History::Admm(r) => r.lagrangian_history.clone(),
            History::Alternating(_) => Vec::new(),
        }
    }

    /// `‖Y − DX‖_F` per round of an alternating baseline.
    #[getter]
    fn objective(&self) -> Vec<f64> {
        match &self.inner.history {
            History::Admm(_) => Vec::new(),
            History::Alternating(obj) => obj.clone(),
        }
    }

    fn reconstruct(&self) -> PyResult<Rows> {
        Ok(rows_of(&self.inner.reconstruct().map_err(err)?))
    }

    fn report_csv(&self) -> String {
        self.inner.history.to_csv()
    }

    fn __repr__(&self) -> String {
        let (m, k) = self.inner.dictionary.shape();
        format!("LearnedModel(m={m}, k={k}, n={}, iterations={})", self.inner.coefficients.cols(), self.iterations())
    }
}

/// Ground-truth dictionary, codes and observations.
#[pyclass(name = "GroundTruth", module = "road_py", frozen)]
struct PyGroundTruth {
    inner: bench::GroundTruth,
}

#[pymethods]
impl PyGroundTruth {
    #[getter]
    fn d0(&self) -> Rows {
        rows_of(&self.inner.d0)
    }

    #[getter]
    fn x0(&self) -> Rows {
        rows_of(&self.inner.x0)
    }

    #[getter]
    fn y_clean(&self) -> Rows {
        rows_of(&self.inner.y_clean)
    }

    #[getter]
    fn y_observed(&self) -> Rows {
        rows_of(&self.inner.y_observed)
    }

    /// `‖Y_observed − Y_clean‖_F`.
    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.noise_norm
    }

    #[getter]
    fn snr_db(&self) -> Option<f64> {
        self.inner.snr_db
    }
}

/// Synthetic data: give `s` (non-zeros per column) or `theta` (Bernoulli).
#[pyfunction]
#[pyo3(signature = (m, k, n, *, s=None, theta=None, snr_db=None, seed=0))]
fn gen_ground_truth(
    m: usize,
    k: usize,
    n: usize,
    s: Option<usize>,
    theta: Option<f64>,
    snr_db: Option<f64>,
    seed: u64,
) -> PyResult<PyGroundTruth> {
    let sparsity = match (s, theta) {
        (Some(s), None) => SparsityModel::Fixed(s),
        (None, Some(t)) => SparsityModel::Bernoulli(t),
        _ => return Err(pyo3::exceptions::PyValueError::new_err("give exactly one of s or theta")),
    };
    let mut gt = bench::gen_ground_truth(m, k, n, sparsity, seed).map_err(err)?;
    if let Some(snr) = snr_db {
        gt = gt
            .with_noise(snr, road_core::rng::derive_seed(seed, &[b"noise"]))
            .map_err(err)?;
    }
    Ok(PyGroundTruth { inner: gt })
}

/// One minus the mean absolute cosine of greedily matched atoms.
#[pyfunction]
fn recovery_error(d_hat: Rows, d0: Rows) -> PyResult<f64> {
    let d_hat = mat_from_rows(d_hat).map_err(err)?;
    let d0 = mat_from_rows(d0).map_err(err)?;
    bench::recovery_error(&d_hat, &d0).map_err(err)
}

/// Learns a `k`-atom dictionary for `y` with the named algorithm.
#[pyfunction]
#[pyo3(signature = (
    y, k, algorithm="road-exact", *, seed=0, max_iter=None, rho=None, rhos=None, betas=None,
    rho_fixed=None, epsilon=None, tol_primal=None, tol_dual=None, init_scale=None, omp_s=None,
    lasso_lambda=None, force=false
))]
#[allow(clippy::too_many_arguments)]
fn learn(
    py: Python<'_>,
    y: Rows,
    k: usize,
    algorithm: &str,
    seed: u64,
    max_iter: Option<usize>,
    rho: Option<f64>,
    rhos: Option<Vec<f64>>,
    betas: Option<Vec<f64>>,
    rho_fixed: Option<f64>,
    epsilon: Option<f64>,
    tol_primal: Option<f64>,
    tol_dual: Option<f64>,
    init_scale: Option<f64>,
    omp_s: Option<usize>,
    lasso_lambda: Option<f64>,
    force: bool,
) -> PyResult<PyLearnedModel> {
    let alg: Algorithm = algorithm.parse().map_err(err)?;
    let y = mat_from_rows(y).map_err(err)?;
    let d = LearnerParams::default();
    let params = LearnerParams {
        rho: rho.unwrap_or(d.rho),
        rhos: triple("rhos", rhos, d.rhos).map_err(err)?,
        betas: triple("betas", betas, d.betas).map_err(err)?,
        rho_fixed: rho_fixed.unwrap_or(d.rho_fixed),
        epsilon,
        tol_primal: tol_primal.unwrap_or(d.tol_primal),
        tol_dual: tol_dual.unwrap_or(d.tol_dual),
        init_scale: init_scale.unwrap_or(d.init_scale),
        allow_penalty_violation: force,
        omp_s: omp_s.unwrap_or(d.omp_s),
        lasso_lambda: lasso_lambda.unwrap_or(d.lasso_lambda),
        max_iter,
        seed,
        ..d
    };
    let inner = py
        .detach(|| learner::learn(alg, &y, k, &params))
        .map_err(err)?;
    Ok(PyLearnedModel { inner })
}

/// Proximal operator of `t·‖·‖₂,₁`.
#[pyfunction]
fn group_soft_threshold(a: Rows, t: f64) -> PyResult<Rows> {
    Ok(rows_of(&linalg::group_soft_threshold(&mat_from_rows(a).map_err(err)?, t)))
}

/// Best rank-one approximation in Frobenius norm.
#[pyfunction]
fn rank_one_project(a: Rows) -> PyResult<Rows> {
    let a = mat_from_rows(a).map_err(err)?;
    Ok(rows_of(&linalg::rank_one_project(&a).map_err(err)?))
}

/// Projection of `w_hat` onto the ball `‖W − Y‖_F ≤ epsilon`.
#[pyfunction]
fn project_to_ball(w_hat: Rows, y: Rows, epsilon: f64) -> PyResult<Rows> {
    let w_hat = mat_from_rows(w_hat).map_err(err)?;
    let y = mat_from_rows(y).map_err(err)?;
    if !w_hat.same_shape(&y) {
        return Err(pyo3::exceptions::PyValueError::new_err("w_hat and y differ in shape"));
    }
    Ok(rows_of(&road_core::admm::project_to_ball(&w_hat, &y, epsilon)))
}

fn experiment_rows(result: &ExperimentResult) -> Vec<(String, usize, Option<f64>, usize, usize)> {
    result
        .means
        .iter()
        .map(|m| (m.algorithm.name().to_string(), m.n, m.mean_error, m.completed, m.failed))
        .collect()
}

/// Runs a named benchmark preset; returns `(algorithm, N, mean_error,
/// completed, failed)` tuples and the per-trial CSV.
#[pyfunction]
#[pyo3(signature = (preset, *, trials=None, seed=None))]
fn run_preset(
    py: Python<'_>,
    preset: &str,
    trials: Option<usize>,
    seed: Option<u64>,
) -> PyResult<(Vec<(String, usize, Option<f64>, usize, usize)>, String)> {
    let mut spec = bench::preset(preset).map_err(err)?;
    if let Some(t) = trials {
        spec.trials = t;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    let result = py
        .detach(|| {
            spec.validate()?;
            bench::run_experiment(&spec, bench::RunOptions::default())
        })
        .map_err(err)?;
    Ok((experiment_rows(&result), result.trials_csv()))
}

#[pyfunction]
fn algorithms() -> Vec<&'static str> {
    Algorithm::ALL.iter().map(|a| a.name()).collect()
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    bench::PRESET_NAMES.to_vec()
}

/// Coupled low/high-resolution dictionaries.
#[pyclass(name = "SrModel", module = "road_py", frozen)]
struct PySrModel {
    inner: superres::SrModel,
}

#[pymethods]
impl PySrModel {
    /// Trains on paired images (`img[y][x]`, values in `[0, 1]`).
    #[staticmethod]
    #[pyo3(signature = (
        lows, highs, *, mode="zeyde", k=64, scale=2, learner="road-exact", seed=0,
        max_iter=None, pca_dim=None, use_features=None
    ))]
    #[allow(clippy::too_many_arguments)]
    fn train(
        py: Python<'_>,
        lows: Vec<Rows>,
        highs: Vec<Rows>,
        mode: &str,
        k: usize,
        scale: usize,
        learner: &str,
        seed: u64,
        max_iter: Option<usize>,
        pca_dim: Option<usize>,
        use_features: Option<bool>,
    ) -> PyResult<Self> {
        let mode: SrMode = mode.parse().map_err(err)?;
        let mut cfg = match mode {
            SrMode::Yang => SrConfig::yang(k),
            SrMode::Zeyde => SrConfig::zeyde(k),
        };
        cfg.scale = scale;
        cfg.learner = learner.parse().map_err(err)?;
        cfg.params.seed = seed;
        cfg.params.max_iter = max_iter;
        cfg.pca_dim = pca_dim;
        if let Some(f) = use_features {
            cfg.use_features = f;
        }
        let lows = lows.into_iter().map(image_from_rows).collect::<Result<Vec<_>, _>>().map_err(err)?;
        let highs = highs.into_iter().map(image_from_rows).collect::<Result<Vec<_>, _>>().map_err(err)?;
        let outcome = py
            .detach(|| {
                cfg.validate()?;
                superres::train_sr(&lows, &highs, &cfg)
            })
            .map_err(err)?;
        Ok(PySrModel { inner: outcome.model })
    }

    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        Ok(PySrModel {
            inner: superres::SrModel::load(&dir).map_err(err)?,
        })
    }

    fn save(&self, dir: PathBuf) -> PyResult<()> {
        self.inner.save(&dir).map_err(err)
    }

    /// Super-resolves `low`; `lambda_rel` is the per-patch lasso weight
    /// relative to `max|D̃ᵀy|`, or pass `omp_s` to code with OMP.
    #[pyo3(signature = (low, *, lambda_rel=0.1, omp_s=None))]
    fn apply(&self, py: Python<'_>, low: Rows, lambda_rel: f64, omp_s: Option<usize>) -> PyResult<Rows> {
        let low = image_from_rows(low).map_err(err)?;
        let coder = match omp_s {
            Some(s) => SrCoder::Omp { s },
            None => match SrCoder::default() {
                SrCoder::Lasso { max_inner, tol, .. } => SrCoder::Lasso { lambda_rel, max_inner, tol },
                other => other,
            },
        };
        let out = py
            .detach(|| superres::apply_sr(&self.inner, &low, coder))
            .map_err(err)?;
        Ok(image_rows(&out))
    }

    #[getter]
    fn scale(&self) -> usize {
        self.inner.scale
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k_atoms()
    }

    #[getter]
    fn mode(&self) -> String {
        self.inner.mode.to_string()
    }
}

#[pyfunction]
fn read_pgm(path: PathBuf) -> PyResult<Rows> {
    Ok(image_rows(&superres::read_pgm(&path).map_err(err)?))
}

#[pyfunction]
fn write_pgm(img: Rows, path: PathBuf) -> PyResult<()> {
    superres::write_pgm(&image_from_rows(img).map_err(err)?, &path).map_err(err)
}

/// PSNR in dB for images in `[0, 1]`; `inf` for identical images.
#[pyfunction]
fn psnr(a: Rows, b: Rows) -> PyResult<f64> {
    let a = image_from_rows(a).map_err(err)?;
    let b = image_from_rows(b).map_err(err)?;
    superres::psnr(&a, &b).map_err(err)
}

/// Bicubic resize to an exact `width × height`.
#[pyfunction]
fn bicubic_resize(img: Rows, width: usize, height: usize) -> PyResult<Rows> {
    let img = image_from_rows(img).map_err(err)?;
    Ok(image_rows(&superres::resize_to(&img, width, height).map_err(err)?))
}

/// Deterministic synthetic `(low, high)` pair with a `size × size` high image.
#[pyfunction]
#[pyo3(signature = (size, scale=2, seed=0))]
fn fixture_pair(size: usize, scale: usize, seed: u64) -> PyResult<(Rows, Rows)> {
    let (low, high) = superres::fixture_pair(size, scale, seed).map_err(err)?;
    Ok((image_rows(&low), image_rows(&high)))
}

#[pymodule]
pub fn road_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLearnedModel>()?;
    m.add_class::<PyGroundTruth>()?;
    m.add_class::<PySrModel>()?;
    m.add_function(wrap_pyfunction!(gen_ground_truth, m)?)?;
    m.add_function(wrap_pyfunction!(recovery_error, m)?)?;
    m.add_function(wrap_pyfunction!(learn, m)?)?;
    m.add_function(wrap_pyfunction!(group_soft_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(rank_one_project, m)?)?;
    m.add_function(wrap_pyfunction!(project_to_ball, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(algorithms, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(read_pgm, m)?)?;
    m.add_function(wrap_pyfunction!(write_pgm, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(bicubic_resize, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_pair, m)?)?;
    Ok(())
}
