//! One entry point for every dictionary learner, keyed by name.

use std::fmt;
use std::str::FromStr;

use crate::admm::{self, AdmmConfig, Variant};
use crate::baselines::{init_dictionary, run_alternating_from, AltConfig, Coder, Updater};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::LearnedModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    RoadExact,
    RoadExactNoisy,
    RoadInexact,
    /// Inexact ROAD with one penalty for all three constraints.
    RoadInexactFixed,
    ModOmp,
    KsvdOmp,
    ModLasso,
    KsvdLasso,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::RoadExact,
        Algorithm::RoadExactNoisy,
        Algorithm::RoadInexact,
        Algorithm::RoadInexactFixed,
        Algorithm::ModOmp,
        Algorithm::KsvdOmp,
        Algorithm::ModLasso,
        Algorithm::KsvdLasso,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::RoadExact => "road-exact",
            Algorithm::RoadExactNoisy => "road-exact-noisy",
            Algorithm::RoadInexact => "road-inexact",
            Algorithm::RoadInexactFixed => "road-inexact-fixed",
            Algorithm::ModOmp => "mod-omp",
            Algorithm::KsvdOmp => "ksvd-omp",
            Algorithm::ModLasso => "mod-lasso",
            Algorithm::KsvdLasso => "ksvd-lasso",
        }
    }

    pub fn is_road(self) -> bool {
        matches!(
            self,
            Algorithm::RoadExact
                | Algorithm::RoadExactNoisy
                | Algorithm::RoadInexact
                | Algorithm::RoadInexactFixed
        )
    }

    /// Iteration cap used when none is given.
    pub fn default_max_iter(self) -> usize {
        match self {
            Algorithm::RoadInexact | Algorithm::RoadInexactFixed => 2000,
            _ => 300,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                Error::Config(format!("unknown algorithm {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Parameters for all learners; each algorithm reads the fields it needs.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnerParams {
    pub rho: f64,
    pub rhos: [f64; 3],
    pub betas: [f64; 3],
    /// Shared penalty of [`Algorithm::RoadInexactFixed`].
    pub rho_fixed: f64,
    /// Noise radius for [`Algorithm::RoadExactNoisy`].
    pub epsilon: Option<f64>,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub init_scale: f64,
    pub allow_penalty_violation: bool,
    pub omp_s: usize,
    /// Lasso weight relative to `max|D₀ᵀY|` for the initial dictionary `D₀`.
    pub lasso_lambda: f64,
    pub lasso_max_inner: usize,
    pub lasso_tol: f64,
    /// ADMM iterations or alternating rounds; `None` picks the algorithm default.
    pub max_iter: Option<usize>,
    pub seed: u64,
}

impl Default for LearnerParams {
    fn default() -> Self {
        let admm = AdmmConfig::default();
        LearnerParams {
            rho: admm.rho,
            rhos: admm.rhos,
            betas: admm.betas,
            rho_fixed: 310.0,
            epsilon: None,
            tol_primal: admm.tol_primal,
            tol_dual: admm.tol_dual,
            init_scale: admm.init_scale,
            allow_penalty_violation: false,
            omp_s: 3,
            lasso_lambda: 0.1,
            lasso_max_inner: 200,
            lasso_tol: 1e-6,
            max_iter: None,
            seed: 0,
        }
    }
}

impl LearnerParams {
    /// The ADMM configuration a ROAD algorithm runs with.
    pub fn admm_config(&self, algorithm: Algorithm, k: usize) -> Result<AdmmConfig> {
        let max_iter = self.max_iter.unwrap_or(algorithm.default_max_iter());
        let (variant, rhos) = match algorithm {
            Algorithm::RoadExact => (Variant::ExactNoiseFree, self.rhos),
            Algorithm::RoadExactNoisy => (Variant::ExactNoisy, self.rhos),
            Algorithm::RoadInexact => (Variant::Inexact, self.rhos),
            Algorithm::RoadInexactFixed => (Variant::Inexact, [self.rho_fixed; 3]),
            other => {
                return Err(Error::Config(format!("{other} is not a ROAD solver")));
            }
        };
        let epsilon = match variant {
            Variant::ExactNoisy => self.epsilon.ok_or_else(|| {
                Error::Config("road-exact-noisy needs a noise radius epsilon".into())
            })?,
            _ => 0.0,
        };
        let cfg = AdmmConfig {
            variant,
            k_atoms: k,
            rho: self.rho,
            rhos,
            betas: self.betas,
            epsilon_noise: epsilon,
            tol_primal: self.tol_primal,
            tol_dual: self.tol_dual,
            max_iter,
            seed: self.seed,
            init_scale: self.init_scale,
            allow_penalty_violation: self.allow_penalty_violation,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Learns a `k`-atom dictionary for `y` with the named algorithm.
pub fn learn(algorithm: Algorithm, y: &Mat, k: usize, params: &LearnerParams) -> Result<LearnedModel> {
    if algorithm.is_road() {
        return admm::learn(y, &params.admm_config(algorithm, k)?);
    }
    let outer_iters = params.max_iter.unwrap_or(algorithm.default_max_iter());
    let updater = match algorithm {
        Algorithm::ModOmp | Algorithm::ModLasso => Updater::Mod,
        _ => Updater::Ksvd,
    };
    let d0 = init_dictionary(y, k, params.seed)?;
    let coder = match algorithm {
        Algorithm::ModOmp | Algorithm::KsvdOmp => Coder::Omp { s: params.omp_s },
        _ => Coder::Lasso {
            lambda: params.lasso_lambda * d0.tr_matmul(y)?.max_abs(),
            max_inner: params.lasso_max_inner,
            tol: params.lasso_tol,
        },
    };
    let cfg = AltConfig::new(coder, updater, outer_iters, params.seed)?;
    run_alternating_from(y, d0, &cfg)
}
