//! `road`: synthesize data, learn dictionaries, run benchmark grids and
//! super-resolve images.
//!
//! Every subcommand takes `--seed`, `--out <dir>` and `--config <file>`
//! and records its resolved settings in `<out>/run-manifest.txt`;
//! config entries are `flag_name = value` lines and explicit flags win.
//! `ROAD_THREADS` caps the worker pool (0 or unset: one per core).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use road_core::learner::{Algorithm, LearnerParams};

use crate::output::MatFormat;

#[derive(Debug, Parser)]
#[command(name = "road", version, about = "Rank-one atomic decomposition dictionary learning")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Draw a ground-truth dictionary, sparse codes and (optionally noisy) data.
    #[command(args_override_self = true)]
    Synth(SynthArgs),
    /// Learn a dictionary from a data matrix.
    #[command(args_override_self = true)]
    Train(TrainArgs),
    /// Run a recovery-error grid from a preset or spec file.
    #[command(args_override_self = true)]
    Bench(BenchArgs),
    /// Learn coupled low/high-resolution dictionaries from PGM pairs.
    #[command(name = "sr-train", args_override_self = true)]
    SrTrain(SrTrainArgs),
    /// Super-resolve a PGM image with a trained model.
    #[command(name = "sr-apply", args_override_self = true)]
    SrApply(SrApplyArgs),
    /// PSNR between two PGM images.
    #[command(args_override_self = true)]
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Base seed (0 when omitted; bench keeps the spec's own seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Key-value file whose entries act as flags.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

impl Common {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: usize,
    /// Non-zeros per coefficient column.
    #[arg(long, conflicts_with = "theta")]
    pub s: Option<usize>,
    /// Bernoulli activation probability, e.g. `0.125` or `6/48`.
    #[arg(long)]
    pub theta: Option<String>,
    #[arg(long)]
    pub snr_db: Option<f64>,
    #[arg(long, value_enum, default_value_t = MatFormat::Roadmat)]
    pub format: MatFormat,
}

#[derive(Debug, Args)]
pub struct LearnerArgs {
    /// Exact-variant penalty.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Inexact-variant penalties ρ₁,ρ₂,ρ₃.
    #[arg(long, value_delimiter = ',')]
    pub rhos: Option<Vec<f64>>,
    /// Inexact-variant slack weights β₁,β₂,β₃.
    #[arg(long, value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,
    /// Shared penalty of road-inexact-fixed.
    #[arg(long)]
    pub rho_fixed: Option<f64>,
    /// Noise radius for road-exact-noisy.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub tol_primal: Option<f64>,
    #[arg(long)]
    pub tol_dual: Option<f64>,
    #[arg(long)]
    pub init_scale: Option<f64>,
    /// ADMM iterations or alternating rounds.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// OMP sparsity for the *-omp baselines.
    #[arg(long)]
    pub omp_s: Option<usize>,
    /// Lasso weight relative to max|D₀ᵀY| for the *-lasso baselines.
    #[arg(long)]
    pub lasso_lambda: Option<f64>,
    /// Run the inexact solver even when ρᵢ ≤ βᵢ + 2.
    #[arg(long)]
    pub force: bool,
}

impl LearnerArgs {
    pub fn params(&self, seed: u64) -> Result<LearnerParams> {
        let d = LearnerParams::default();
        let triple = |flag: &str, v: &Option<Vec<f64>>, def: [f64; 3]| -> Result<[f64; 3]> {
            match v {
                None => Ok(def),
                Some(v) => v.as_slice().try_into().map_err(|_| {
                    anyhow::anyhow!("--{flag} expects three comma-separated values, got {}", v.len())
                }),
            }
        };
        Ok(LearnerParams {
            rho: self.rho.unwrap_or(d.rho),
            rhos: triple("rhos", &self.rhos, d.rhos)?,
            betas: triple("betas", &self.betas, d.betas)?,
            rho_fixed: self.rho_fixed.unwrap_or(d.rho_fixed),
            epsilon: self.epsilon,
            tol_primal: self.tol_primal.unwrap_or(d.tol_primal),
            tol_dual: self.tol_dual.unwrap_or(d.tol_dual),
            init_scale: self.init_scale.unwrap_or(d.init_scale),
            allow_penalty_violation: self.force,
            omp_s: self.omp_s.unwrap_or(d.omp_s),
            lasso_lambda: self.lasso_lambda.unwrap_or(d.lasso_lambda),
            max_iter: self.max_iter,
            seed,
            ..d
        })
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub out: PathBuf,
    /// Data matrix (`.roadmat` or `.csv`).
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long, default_value = "road-exact")]
    pub algorithm: Algorithm,
    /// Number of atoms.
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub learner: LearnerArgs,
    /// Ground-truth dictionary; the recovery error is printed and recorded.
    #[arg(long)]
    pub d0: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MatFormat::Roadmat)]
    pub format: MatFormat,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
    pub preset: Option<String>,
    /// Experiment spec file (key-value).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Overrides the number of trials per cell.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Record per-trial wall-clock seconds (outputs are then not reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SrLearner {
    Road,
    Ksvd,
    Mod,
}

impl SrLearner {
    pub fn algorithm(self) -> Algorithm {
        match self {
            SrLearner::Road => Algorithm::RoadExact,
            SrLearner::Ksvd => Algorithm::KsvdLasso,
            SrLearner::Mod => Algorithm::ModLasso,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Yang,
    Zeyde,
}

#[derive(Debug, Args)]
pub struct SrTrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Model directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Zeyde)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SrLearner::Road)]
    pub learner: SrLearner,
    /// Low-resolution training images, comma-separated or repeated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub low: Vec<PathBuf>,
    /// High-resolution counterparts, in the same order.
    #[arg(long, value_delimiter = ',', required = true)]
    pub high: Vec<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub scale: usize,
    #[arg(long)]
    pub patch_size: Option<usize>,
    #[arg(long)]
    pub overlap: Option<usize>,
    /// Zeyde mode on raw patches instead of gradient features.
    #[arg(long)]
    pub raw: bool,
    #[arg(long)]
    pub pca_dim: Option<usize>,
    #[arg(long)]
    pub pca_variance: Option<f64>,
    #[command(flatten)]
    pub learner_args: LearnerArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoderArg {
    Lasso,
    Omp,
}

#[derive(Debug, Args)]
pub struct SrApplyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Output directory; receives `sr.pgm`, `bicubic.pgm` and a manifest.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = CoderArg::Lasso)]
    pub coder: CoderArg,
    /// Lasso weight relative to max|D̃ᵀy| per patch.
    #[arg(long, default_value_t = 0.1)]
    pub lambda_rel: f64,
    #[arg(long, default_value_t = 500)]
    pub max_inner: usize,
    #[arg(long, default_value_t = 3)]
    pub omp_s: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    /// Optional directory for `psnr.txt`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reference image.
    pub reference: PathBuf,
    /// Image under test.
    pub image: PathBuf,
}

fn init_threads() -> Result<()> {
    let n = match std::env::var("ROAD_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .with_context(|| format!("ROAD_THREADS must be a non-negative integer, got {v:?}"))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("starting worker pool")
}

fn run() -> Result<()> {
    let cmd = Cli::command();
    let argv = config::expand(std::env::args_os().collect(), &cmd)?;
    let matches = cmd.try_get_matches_from(argv).unwrap_or_else(|e| e.exit());
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    init_threads()?;
    match cli.command {
        Cmd::Synth(a) => commands::synth(&a),
        Cmd::Train(a) => commands::train(&a),
        Cmd::Bench(a) => commands::bench(&a),
        Cmd::SrTrain(a) => commands::sr_train(&a),
        Cmd::SrApply(a) => commands::sr_apply(&a),
        Cmd::Eval(a) => commands::eval(&a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
