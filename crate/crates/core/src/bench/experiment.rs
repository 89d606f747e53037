use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::bench::data::{gen_ground_truth, recovery_error, SparsityModel};
use crate::error::{Error, Result};
use crate::kvconfig::KvConfig;
use crate::learner::{learn, Algorithm, LearnerParams};
use crate::rng::derive_seed;

/// One learner in an experiment with its iteration budget.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub max_iter: usize,
}

impl AlgorithmRun {
    pub fn new(algorithm: Algorithm, max_iter: usize) -> Self {
        AlgorithmRun { algorithm, max_iter }
    }
}

/// A recovery experiment: for every `N` in the grid and every trial, draw
/// ground truth, run each algorithm on the same data, score the dictionary.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub m: usize,
    pub k: usize,
    pub n_grid: Vec<usize>,
    pub sparsity: SparsityModel,
    /// Clean data when `None`; noisy variants then get ε = 0.
    pub snr_db: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub algorithms: Vec<AlgorithmRun>,
    /// Shared learner settings; `max_iter`, `seed` and `epsilon` are set per trial.
    pub params: LearnerParams,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.m == 0 || self.k == 0 {
            return bad("m and k must be positive".into());
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return bad("n_grid must list positive sample counts".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms given".into());
        }
        if let Some(a) = self.algorithms.iter().find(|a| a.max_iter == 0) {
            return bad(format!("max_iter for {} must be positive", a.algorithm));
        }
        match self.sparsity {
            SparsityModel::Fixed(s) if s == 0 || s > self.k => {
                return bad(format!("sparsity {s} outside 1..={}", self.k))
            }
            SparsityModel::Bernoulli(t) if !(t > 0.0 && t < 1.0) => {
                return bad(format!("Bernoulli probability {t} outside (0, 1)"))
            }
            _ => {}
        }
        if let Some(s) = self.snr_db {
            if !s.is_finite() {
                return bad(format!("snr_db must be finite, got {s}"));
            }
        }
        Ok(())
    }

    /// Reads a spec from a key-value file. Missing learner keys keep their
    /// defaults; `max_iters` lists one budget per algorithm.
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let req = |key: &str| Error::Config(format!("missing key {key}"));
        let algorithms: Vec<Algorithm> = kv.get_list("algorithms")?.ok_or_else(|| req("algorithms"))?;
        let max_iters: Vec<usize> = match kv.get_list("max_iters")? {
            Some(v) if v.len() == algorithms.len() => v,
            Some(v) => {
                return Err(Error::Config(format!(
                    "max_iters has {} entries for {} algorithms",
                    v.len(),
                    algorithms.len()
                )))
            }
            None => algorithms.iter().map(|a| a.default_max_iter()).collect(),
        };
        let d = LearnerParams::default();
        let triple = |key: &str, default: [f64; 3]| -> Result<[f64; 3]> {
            match kv.get_list::<f64>(key)? {
                None => Ok(default),
                Some(v) => v
                    .try_into()
                    .map_err(|_| Error::Config(format!("{key} needs three values"))),
            }
        };
        let params = LearnerParams {
            rho: kv.get_or("rho", d.rho)?,
            rhos: triple("rhos", d.rhos)?,
            betas: triple("betas", d.betas)?,
            rho_fixed: kv.get_or("rho_fixed", d.rho_fixed)?,
            init_scale: kv.get_or("init_scale", d.init_scale)?,
            omp_s: kv.get_or("omp_s", d.omp_s)?,
            lasso_lambda: kv.get_or("lasso_lambda", d.lasso_lambda)?,
            ..d
        };
        let spec = ExperimentSpec {
            name: kv.get_or("name", "custom".to_string())?,
            m: kv.get("m")?.ok_or_else(|| req("m"))?,
            k: kv.get("k")?.ok_or_else(|| req("k"))?,
            n_grid: kv.get_list("n_grid")?.ok_or_else(|| req("n_grid"))?,
            sparsity: kv.get("sparsity")?.ok_or_else(|| req("sparsity"))?,
            snr_db: kv.get("snr_db")?,
            trials: kv.get_or("trials", 10)?,
            seed: kv.get_or("seed", 0)?,
            algorithms: algorithms
                .into_iter()
                .zip(max_iters)
                .map(|(a, it)| AlgorithmRun::new(a, it))
                .collect(),
            params,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_kv(&self) -> KvConfig {
        let join = |v: &[String]| v.join(", ");
        let fl = |v: &[f64]| join(&v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>());
        let mut kv = KvConfig::default();
        kv.set("name", self.name.clone());
        kv.set("m", self.m.to_string());
        kv.set("k", self.k.to_string());
        kv.set("n_grid", join(&self.n_grid.iter().map(|n| n.to_string()).collect::<Vec<_>>()));
        kv.set("sparsity", self.sparsity.to_string());
        if let Some(s) = self.snr_db {
            kv.set("snr_db", format!("{s:?}"));
        }
        kv.set("trials", self.trials.to_string());
        kv.set("seed", self.seed.to_string());
        kv.set(
            "algorithms",
            join(&self.algorithms.iter().map(|a| a.algorithm.to_string()).collect::<Vec<_>>()),
        );
        kv.set(
            "max_iters",
            join(&self.algorithms.iter().map(|a| a.max_iter.to_string()).collect::<Vec<_>>()),
        );
        let p = &self.params;
        kv.set("rho", format!("{:?}", p.rho));
        kv.set("rhos", fl(&p.rhos));
        kv.set("betas", fl(&p.betas));
        kv.set("rho_fixed", format!("{:?}", p.rho_fixed));
        kv.set("init_scale", format!("{:?}", p.init_scale));
        kv.set("omp_s", p.omp_s.to_string());
        kv.set("lasso_lambda", format!("{:?}", p.lasso_lambda));
        kv
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Fills the `seconds` column; off by default so outputs are reproducible.
    pub record_timing: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub algorithm: Algorithm,
    pub n: usize,
    pub trial: usize,
    /// `Err` holds the failure message.
    pub error: std::result::Result<f64, String>,
    pub seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanRecord {
    pub algorithm: Algorithm,
    pub n: usize,
    /// Mean over completed trials; `None` if every trial failed.
    pub mean_error: Option<f64>,
    pub completed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    /// Ordered by algorithm (spec order), then `N`, then trial.
    pub trials: Vec<TrialRecord>,
    pub means: Vec<MeanRecord>,
}

/// Seed of the ground truth shared by all algorithms in one cell.
pub fn truth_seed(base: u64, n: usize, trial: usize) -> u64 {
    derive_seed(base, &[b"truth", &(n as u64).to_le_bytes(), &(trial as u64).to_le_bytes()])
}

pub fn noise_seed(base: u64, n: usize, trial: usize) -> u64 {
    derive_seed(base, &[b"noise", &(n as u64).to_le_bytes(), &(trial as u64).to_le_bytes()])
}

pub fn algorithm_seed(base: u64, algorithm: Algorithm, n: usize, trial: usize) -> u64 {
    derive_seed(
        base,
        &[
            algorithm.name().as_bytes(),
            &(n as u64).to_le_bytes(),
            &(trial as u64).to_le_bytes(),
        ],
    )
}

/// Runs one algorithm on one ground-truth draw and returns the recovery error.
pub fn run_trial(spec: &ExperimentSpec, run: &AlgorithmRun, n: usize, trial: usize) -> Result<f64> {
    let mut gt = gen_ground_truth(spec.m, spec.k, n, spec.sparsity, truth_seed(spec.seed, n, trial))?;
    if let Some(snr) = spec.snr_db {
        gt = gt.with_noise(snr, noise_seed(spec.seed, n, trial))?;
    }
    let params = LearnerParams {
        epsilon: Some(gt.noise_norm),
        max_iter: Some(run.max_iter),
        seed: algorithm_seed(spec.seed, run.algorithm, n, trial),
        ..spec.params.clone()
    };
    let model = learn(run.algorithm, &gt.y_observed, spec.k, &params)?;
    recovery_error(&model.dictionary, &gt.d0)
}

/// Runs every (algorithm, N, trial) cell in parallel. Results do not depend on
/// the thread count; a failed trial is recorded and left out of the mean.
pub fn run_experiment(spec: &ExperimentSpec, opts: RunOptions) -> Result<ExperimentResult> {
    spec.validate()?;
    let mut cells = Vec::new();
    for run in &spec.algorithms {
        for &n in &spec.n_grid {
            for trial in 0..spec.trials {
                cells.push((run, n, trial));
            }
        }
    }
    let trials: Vec<TrialRecord> = cells
        .into_par_iter()
        .map(|(run, n, trial)| {
            let start = Instant::now();
            let error = run_trial(spec, run, n, trial).map_err(|e| e.to_string());
            TrialRecord {
                algorithm: run.algorithm,
                n,
                trial,
                error,
                seconds: opts.record_timing.then(|| start.elapsed().as_secs_f64()),
            }
        })
        .collect();
    let means = trials
        .chunks(spec.trials)
        .map(|group| {
            let ok: Vec<f64> = group.iter().filter_map(|t| t.error.as_ref().ok().copied()).collect();
            MeanRecord {
                algorithm: group[0].algorithm,
                n: group[0].n,
                mean_error: (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64),
                completed: ok.len(),
                failed: group.len() - ok.len(),
            }
        })
        .collect();
    Ok(ExperimentResult { trials, means })
}

impl ExperimentResult {
    /// `algorithm,N,trial,error,seconds,status`; failed trials leave `error` blank.
    pub fn trials_csv(&self) -> String {
        let mut out = String::from("algorithm,N,trial,error,seconds,status\n");
        for t in &self.trials {
            let (err, status) = match &t.error {
                Ok(e) => (format!("{e:?}"), "ok"),
                Err(_) => (String::new(), "failed"),
            };
            let secs = t.seconds.map(|s| format!("{s:.6}")).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{err},{secs},{status}", t.algorithm, t.n, t.trial);
        }
        out
    }

    /// `algorithm,N,mean_error,completed,failed`.
    pub fn means_csv(&self) -> String {
        let mut out = String::from("algorithm,N,mean_error,completed,failed\n");
        for m in &self.means {
            let mean = m.mean_error.map(|e| format!("{e:?}")).unwrap_or_default();
            let _ = writeln!(out, "{},{},{mean},{},{}", m.algorithm, m.n, m.completed, m.failed);
        }
        out
    }

    pub fn failures(&self) -> impl Iterator<Item = &TrialRecord> {
        self.trials.iter().filter(|t| t.error.is_err())
    }

    pub fn mean_for(&self, algorithm: Algorithm, n: usize) -> Option<&MeanRecord> {
        self.means.iter().find(|m| m.algorithm == algorithm && m.n == n)
    }
}
